"""latkit: asymptotic lattice synthesis, labelling, and chart recovery.

The package covers three stages of the inverse problem for semiclassical
joint spectra near a regular value:

* forward synthesis of lattice slices with known ground truth (`synth`),
* integer labelling of the slices and harmonization across the
  hbar-sequence (`labelling`),
* least-squares recovery of the chart jet, its Jacobian field, and
  rotation-number estimates (`recovery`).

A compiled walk kernel is used when available; set LATKIT_PURE=1 to force
the pure-Python fallback.
"""
from .charts import ChartJet, model_system
from .errors import (
    DegenerateSliceError,
    InsufficientDataError,
    LatKitError,
    PoleError,
    SchemaError,
    SequenceBreakError,
    StructuralMismatchError,
    UnderdeterminedFitError,
    UnsupportedModelError,
    ValidationError,
)
from .geometry import Rect, Region
from .labelling import (
    LabellingConfig,
    SequenceConfig,
    harmonize_maps,
    label_sequence,
    label_single,
    label_single_with_stats,
)
from .model import (
    AsymptoticLattice,
    EquivalenceResult,
    LabelMap,
    LatticeSample,
    LinearLabelling,
    SliceDiagnostics,
    WalkStats,
    Witness,
    apply_witness,
    labelling_equivalent,
    restrict_to_points,
    validate_lattice,
)
from .recovery import RecoveryReport, fit_chart, jacobian_field, rotation_number
from .synth import GroundTruth, NoiseModel, generate

__version__ = "0.1.0"

__all__ = [
    "AsymptoticLattice", "ChartJet", "DegenerateSliceError", "EquivalenceResult",
    "GroundTruth", "InsufficientDataError", "LabelMap", "LabellingConfig",
    "LatKitError", "LatticeSample", "LinearLabelling", "NoiseModel", "PoleError",
    "RecoveryReport", "Rect", "Region", "SchemaError", "SequenceBreakError",
    "SequenceConfig", "SliceDiagnostics", "StructuralMismatchError",
    "UnderdeterminedFitError", "UnsupportedModelError", "ValidationError",
    "WalkStats", "Witness", "apply_witness", "fit_chart", "generate",
    "harmonize_maps", "jacobian_field", "label_sequence", "label_single",
    "label_single_with_stats",
    "labelling_equivalent", "model_system", "restrict_to_points",
    "rotation_number", "validate_lattice",
]
