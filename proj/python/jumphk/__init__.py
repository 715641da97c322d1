"""Python face of the jump-diffusion simulator and estimator suite.

Everything heavy lives in the compiled core; configs and reports cross the
boundary as JSON text.
"""

from ._core import (
    __version__,
    claim_description,
    claim_ids,
    config_digest,
    export_operator,
    heat_row,
    run,
    run_claim,
    validate,
)

__all__ = [
    "__version__",
    "claim_description",
    "claim_ids",
    "config_digest",
    "export_operator",
    "heat_row",
    "run",
    "run_claim",
    "validate",
]
