"""Substation configuration identification from synchrophasor measurements."""

from .phasor import DEFAULT_THRESHOLDS, MeasurementChannel, Phasor, PmuFrame, Thresholds
from .topology import (ArrangementKind, ComponentArrangement, FunctionalArrangement, SubstationSpec, ca_to_fa,
                       enumerate_cas, enumerate_fas, fa_category, observable)
from .ldm import ldm_identify
from .nn import MlpModel, nn_identify, train, train_for
from .stream import NoiseModel, Scenario, enumerate_scenarios, read_stream, synthesize, write_stream

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_THRESHOLDS", "MeasurementChannel", "Phasor", "PmuFrame", "Thresholds",
    "ArrangementKind", "ComponentArrangement", "FunctionalArrangement", "SubstationSpec", "ca_to_fa",
    "enumerate_cas", "enumerate_fas", "fa_category", "observable",
    "ldm_identify", "MlpModel", "nn_identify", "train", "train_for",
    "NoiseModel", "Scenario", "enumerate_scenarios", "read_stream", "synthesize", "write_stream",
]
