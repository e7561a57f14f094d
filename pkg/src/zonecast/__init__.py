"""Zonal load forecasting workbench.

Pipeline pieces: synthetic/ingested zonal datasets, two linear-regression
forecast models, temperature attack simulation, time-series similarity
measures, and similarity-baseline anomaly detection, wired together by the
``zonecast`` CLI.
"""

from .core import (HourlyTimestamp, TimeSeries, Unit, ZonalDataset, align,
                   sample_mean_sd, znormalize)
from .synth import SynthConfig, generate_synthetic
from .features import (DesignBuilder, DesignMatrix, build_design_f1,
                       build_design_f2, train_test_split)
from .regress import FitStats, FittedModel, fit_and_evaluate, fit_ols, metrics, predict
from .similarity import (SimilarityParams, SimilarityVector, acf_estimate,
                         d_acf, d_cor1, d_cor2, d_lp, d_periodogram, d_sax,
                         pearson_cor, periodogram, sax_transform,
                         similarity_vector)
from .attack import (AttackKind, AttackResult, AttackSpec, inject_gaussian,
                     optimize_attack, project_lp)
from .detect import (Baseline, DetectionVerdict, ExperimentResult,
                     calibrate_baseline, detection_experiment,
                     evaluate_constraints)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
