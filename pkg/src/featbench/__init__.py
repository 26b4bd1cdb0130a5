"""Feature selection and classifier benchmarking toolkit."""

from featbench.data import (
    Dataset, GrayImage, SplitConfig, SynthSpec, clean, load_csv, load_pgm, quantile_bin,
    stratified_split, synth_generate, write_csv, write_pgm,
)
from featbench.errors import ConfigError, DataError, FeatbenchError, TrainingError
from featbench.metrics import ConfusionMatrix, MetricsReport, confusion, report

__version__ = "0.1.0"
