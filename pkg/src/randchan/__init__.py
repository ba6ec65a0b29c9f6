"""Random quantum channels: sampling, representations, classical reductions and spectral statistics."""

__version__ = "0.1.0"

from .channel import (  # noqa: E402
    BlochForm,
    CPTPReport,
    FanoForm,
    QuantumChannel,
    bloch_form,
    choi_rank,
    depolarizing_channel,
    fano_form,
    identity_channel,
    load_channel,
    save_channel,
    unitary_channel,
    validate_cptp,
    verify_fano_equivalence,
)
from .ensembles import RngStream  # noqa: E402
from .samplers import (  # noqa: E402
    EnsembleSpec,
    sample,
    sample_choi,
    sample_kraus,
    sample_lebesgue,
    sample_stinespring,
)

__all__ = [
    "__version__",
    "BlochForm",
    "CPTPReport",
    "EnsembleSpec",
    "FanoForm",
    "QuantumChannel",
    "RngStream",
    "bloch_form",
    "choi_rank",
    "depolarizing_channel",
    "fano_form",
    "identity_channel",
    "load_channel",
    "sample",
    "sample_choi",
    "sample_kraus",
    "sample_lebesgue",
    "sample_stinespring",
    "save_channel",
    "unitary_channel",
    "validate_cptp",
    "verify_fano_equivalence",
]
