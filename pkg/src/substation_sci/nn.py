"""Truth-table-trained neural identifiers.

A sigmoid MLP with one hidden layer decides one RBA node pair or one SBA
branch; MTBA uses a single neuron.  Training is full-batch gradient descent
on mean squared error and stops as soon as every thresholded output matches
its target.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .ldm import PIPELINES, Bits
from .phasor import DEFAULT_THRESHOLDS, PmuFrame, Thresholds
from .topology import ArrangementKind, FunctionalArrangement, SubstationSpec


class TrainingError(RuntimeError):
    def __init__(self, message: str, final_loss: float = float("nan")):
        super().__init__(message)
        self.final_loss = final_loss


class UntrainedModelError(RuntimeError):
    pass


def sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


@dataclass(frozen=True)
class TruthTable:
    rows: Tuple[Tuple[Bits, int], ...]

    def __post_init__(self):
        rows = tuple((tuple(int(v) for v in x), int(y)) for x, y in self.rows)
        if not rows:
            raise ValueError("truth table is empty")
        if len({len(x) for x, _ in rows}) != 1:
            raise ValueError("truth table rows have different input widths")
        seen: Dict[Bits, int] = {}
        for x, y in rows:
            if seen.setdefault(x, y) != y:
                raise ValueError(f"conflicting targets for input {x}")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_function(cls, fn: Callable[[Bits], int], width: int) -> "TruthTable":
        return cls(tuple((x, int(fn(x))) for x in itertools.product((1, 0), repeat=width)))

    @property
    def width(self) -> int:
        return len(self.rows[0][0])

    @property
    def X(self) -> np.ndarray:
        return np.array([x for x, _ in self.rows], dtype=float)

    @property
    def y(self) -> np.ndarray:
        return np.array([y for _, y in self.rows], dtype=float)

    def __add__(self, other: "TruthTable") -> "TruthTable":
        have = {x for x, _ in self.rows}
        return TruthTable(self.rows + tuple(r for r in other.rows if r[0] not in have))


# Listed training rows for the ring-bus pair (inputs C, A, B) and single-bus branch (inputs B, A).
RBA_PAIR_ROWS = TruthTable((
    ((1, 1, 1), 1),
    ((1, 0, 0), 0),
    ((0, 1, 1), 0),
    ((0, 1, 0), 0),
    ((0, 0, 1), 0),
    ((0, 0, 0), 0),
))
SBA_BRANCH_ROWS = TruthTable((
    ((1, 1), 1),
    ((0, 1), 0),
    ((0, 0), 0),
))


def _and(x: Bits) -> int:
    return int(all(x))


# Completed tables: the listed rows plus every other input, labelled with the
# fail-safe 0 the rule-based identifier produces for them.
RBA_PAIR_TABLE = RBA_PAIR_ROWS + TruthTable.from_function(_and, 3)
SBA_BRANCH_TABLE = SBA_BRANCH_ROWS + TruthTable.from_function(_and, 2)
MTBA_TABLE = TruthTable.from_function(_and, 2)


@dataclass
class MlpModel:
    """One-hidden-layer sigmoid network with a thresholded scalar output.

    ``hidden_width == 0`` is the single-neuron case: W1/B1 are empty and W2
    holds the input weights directly.
    """

    input_width: int
    hidden_width: int
    W1: np.ndarray
    B1: np.ndarray
    W2: np.ndarray
    B2: float
    activation: str = "sigmoid"
    output_threshold: float = 0.5
    meta: Dict = field(default_factory=dict)

    def __post_init__(self):
        self.W1 = np.asarray(self.W1, dtype=float).reshape(self.hidden_width, self.input_width)
        self.B1 = np.asarray(self.B1, dtype=float).reshape(self.hidden_width)
        self.W2 = np.asarray(self.W2, dtype=float).reshape(1, self.hidden_width or self.input_width)
        self.B2 = float(self.B2)
        if self.activation != "sigmoid":
            raise ValueError(f"unsupported activation {self.activation}")
        if not 0.0 < self.output_threshold < 1.0:
            raise ValueError("output threshold must lie in (0, 1)")

    def params(self) -> Dict[str, np.ndarray]:
        return {"W1": self.W1, "B1": self.B1, "W2": self.W2, "B2": np.array(self.B2)}

    def to_dict(self) -> Dict:
        return {
            "input_width": self.input_width,
            "hidden_width": self.hidden_width,
            "activation": self.activation,
            "output_threshold": self.output_threshold,
            "W1": self.W1.ravel().tolist(),
            "B1": self.B1.tolist(),
            "W2": self.W2.ravel().tolist(),
            "B2": self.B2,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: Dict) -> "MlpModel":
        return cls(d["input_width"], d["hidden_width"], d["W1"], d["B1"], d["W2"], d["B2"],
                   d.get("activation", "sigmoid"), d.get("output_threshold", 0.5), d.get("meta", {}))

    def __eq__(self, other):
        if not isinstance(other, MlpModel):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def forward(model: MlpModel, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Hidden activations and output probabilities for a batch of inputs."""
    if model.hidden_width == 0:
        hidden = X
    else:
        hidden = sigmoid(X @ model.W1.T + model.B1)
    out = sigmoid(hidden @ model.W2[0] + model.B2)
    return hidden, out


def loss_and_grad(model: MlpModel, X: np.ndarray, y: np.ndarray) -> Tuple[float, Dict[str, np.ndarray]]:
    hidden, out = forward(model, X)
    err = out - y
    loss = float(np.mean(err ** 2))
    d_out = 2.0 * err / len(y) * out * (1.0 - out)
    grads = {"W2": (d_out @ hidden)[None, :], "B2": np.array(d_out.sum())}
    if model.hidden_width == 0:
        grads["W1"], grads["B1"] = np.zeros_like(model.W1), np.zeros_like(model.B1)
    else:
        d_hidden = np.outer(d_out, model.W2[0]) * hidden * (1.0 - hidden)
        grads["W1"] = d_hidden.T @ X
        grads["B1"] = d_hidden.sum(axis=0)
    return loss, grads


def infer_batch(model: Optional[MlpModel], X) -> np.ndarray:
    if model is None:
        raise UntrainedModelError("no trained model supplied")
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.input_width:
        raise ValueError(f"expected inputs of width {model.input_width}, got shape {X.shape}")
    return (forward(model, X)[1] >= model.output_threshold).astype(int)


def infer(model: Optional[MlpModel], inputs: Sequence[int]) -> int:
    return int(infer_batch(model, [inputs])[0])


@dataclass(frozen=True)
class TrainingReport:
    converged: bool
    epochs: int
    final_loss: float


def train(table: TruthTable, hidden_width: int = 4, seed: int = 42, learning_rate: float = 0.5,
          max_epochs: int = 20000) -> Tuple[MlpModel, TrainingReport]:
    if hidden_width < 1:
        raise ValueError("hidden_width must be >= 1; use train_single_neuron for the bypassed case")
    X, y = table.X, table.y
    rng = np.random.default_rng(seed)
    model = MlpModel(
        input_width=table.width,
        hidden_width=hidden_width,
        W1=rng.normal(0.0, 1.0, (hidden_width, table.width)),
        B1=np.zeros(hidden_width),
        W2=rng.normal(0.0, 1.0, (1, hidden_width)),
        B2=0.0,
    )
    target = y.astype(bool)
    epoch, loss = 0, float("nan")
    for epoch in range(max_epochs + 1):
        loss, grads = loss_and_grad(model, X, y)
        if np.array_equal(forward(model, X)[1] >= model.output_threshold, target):
            break
        if epoch == max_epochs:
            raise TrainingError(f"no exact fit after {max_epochs} epochs (loss {loss:.3g})", loss)
        model.W1 -= learning_rate * grads["W1"]
        model.B1 -= learning_rate * grads["B1"]
        model.W2 -= learning_rate * grads["W2"]
        model.B2 -= learning_rate * float(grads["B2"])
    report = TrainingReport(True, epoch, loss)
    model.meta = {"seed": seed, "learning_rate": learning_rate, "max_epochs": max_epochs,
                  "epochs": epoch, "final_loss": loss, "rows": len(table.rows)}
    return model, report


def train_single_neuron(table: TruthTable, max_epochs: int = 1000) -> Tuple[MlpModel, TrainingReport]:
    """Perceptron fit with a strict margin, so no training point sits on the boundary."""
    X = np.hstack([table.X, np.ones((len(table.rows), 1))])
    y = table.y
    w = np.zeros(X.shape[1])
    for epoch in range(max_epochs + 1):
        mistakes = 0
        for xi, yi in zip(X, y):
            s = xi @ w
            if yi == 1 and s <= 0:
                w += xi
                mistakes += 1
            elif yi == 0 and s >= 0:
                w -= xi
                mistakes += 1
        if mistakes == 0:
            break
    else:
        raise TrainingError(f"table is not linearly separable (no fit in {max_epochs} epochs)")
    model = MlpModel(table.width, 0, np.zeros((0, table.width)), np.zeros(0), w[:-1], w[-1])
    loss = float(np.mean((forward(model, table.X)[1] - y) ** 2))
    model.meta = {"rule": "perceptron", "epochs": epoch, "final_loss": loss, "rows": len(table.rows)}
    return model, TrainingReport(True, epoch, loss)


def save_model(model: MlpModel, path, role: str = "") -> None:
    doc = {"role": role, **model.to_dict()}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_model(path) -> MlpModel:
    return MlpModel.from_dict(json.loads(Path(path).read_text()))


MODEL_ROLES = {
    ArrangementKind.MTBA: "mtba_neuron",
    ArrangementKind.RBA: "rba_pair",
    ArrangementKind.SBA: "sba_branch",
}


def train_for(kind: ArrangementKind, seed: int = 42, hidden_width: int = 4, learning_rate: float = 0.5,
              max_epochs: int = 20000, completed: bool = False) -> Tuple[MlpModel, TrainingReport]:
    """Train the one model a substation kind needs.

    By default the ring-pair and single-bus networks see only the listed
    table rows; ``completed=True`` adds the remaining inputs with target 0,
    which removes the seed dependence of the unlisted outputs.
    """
    kind = ArrangementKind(kind)
    if kind is ArrangementKind.MTBA:
        return train_single_neuron(MTBA_TABLE)
    if kind is ArrangementKind.RBA:
        table = RBA_PAIR_TABLE if completed else RBA_PAIR_ROWS
    else:
        table = SBA_BRANCH_TABLE if completed else SBA_BRANCH_ROWS
    return train(table, hidden_width, seed, learning_rate, max_epochs)


def extrapolation_mismatches(model: MlpModel, reference: Optional[Callable[[Bits], int]] = None) -> list:
    """Inputs where the thresholded output differs from the AND rule."""
    reference = reference or (lambda x: int(all(x)))
    xs = list(itertools.product((0, 1), repeat=model.input_width))
    return [x for x, y in zip(xs, infer_batch(model, xs)) if int(y) != reference(x)]


def nn_decider(model: Optional[MlpModel]):
    if model is None:
        raise UntrainedModelError("no trained model supplied")
    return lambda bits: infer_batch(model, bits)


def nn_identify(spec: SubstationSpec, frame: PmuFrame, model: Optional[MlpModel],
                th: Thresholds = DEFAULT_THRESHOLDS, flags: Optional[list] = None) -> FunctionalArrangement:
    return PIPELINES[spec.kind](spec, frame, th, nn_decider(model), flags)


def nn_identify_mtba(spec, frame, model, th=DEFAULT_THRESHOLDS, flags=None) -> FunctionalArrangement:
    return PIPELINES[ArrangementKind.MTBA](spec, frame, th, nn_decider(model), flags)


def nn_identify_rba(spec, frame, model, th=DEFAULT_THRESHOLDS, flags=None) -> FunctionalArrangement:
    return PIPELINES[ArrangementKind.RBA](spec, frame, th, nn_decider(model), flags)


def nn_identify_sba(spec, frame, model, th=DEFAULT_THRESHOLDS, flags=None) -> FunctionalArrangement:
    return PIPELINES[ArrangementKind.SBA](spec, frame, th, nn_decider(model), flags)
