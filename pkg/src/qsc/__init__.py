"""Frequency-multiplexed qubit readout: a conventional demodulation chain and
the same chain recast as a small trainable classifier.

Typical use::

    from qsc import reference_config, run_reference
    run = run_reference(reference_config())
    run.report.crosstalk_free
"""
from .config import EvalConfig, RunConfig, SpectrumConfig, reference_config
from .dsp import (DemodKernel, DiscriminantLine, build_weighted_kernel, classify_dsp, collapse_to_kernel,
                  demodulate, fit_bisector, fit_discriminant, fit_svm, project, rectangular_kernel,
                  three_stage_demodulate)
from .errors import (CalibrationError, ConfigError, DataFormatError, FitError, QscError, ShapeError,
                     UndefinedFidelityError)
from .metrics import (ConfusionStats, FidelityReport, assignment_fidelity, baseline_stats, confusion,
                      crosstalk_free_check, fidelity_gaps, format_percent, subset_fidelities)
from .network import (FeatureScaler, QscModel, TrainConfig, TrainTrace, classify_qsc, fit_feature_scaler,
                      forward, init_from_dsp, loss_and_gradient, train)
from .pipeline import cloud_shift, evaluate, fit_baseline, run_reference, train_qsc
from .signal import (BasisState, Dataset, ShotRecord, SignalModelConfig, generate_dataset, generate_shot,
                     split_dataset, subset_states)
from .spectrum import SpectrumReport, amplitude_spectrum, detect_peaks

__version__ = "0.1.0"
