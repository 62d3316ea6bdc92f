"""Signal generation, Monte-Carlo experiments, MSD traces, and cost formulas.

Randomness is counter-keyed rather than sequential: the unknown system of
run r comes from the stream (seed, 0, r) and the samples of time instant
i from (seed, 1, r, i), with node k reading row k of that instant's
block. Re-running any (run, node, instant) triple therefore reproduces
its data regardless of execution order, and results do not depend on how
many nodes are simulated after node k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from .diffusion import (
    Protocol,
    build_topology,
    identity_weights,
    metropolis_weights,
    network_step,
)
from .engines import Engine, EngineParams, init_state
from .numerics import DimensionMismatchError

__all__ = [
    "MSD_FLOOR_DB",
    "SignalModel",
    "SparsityKind",
    "SparsitySpec",
    "TopologySpec",
    "ExperimentConfig",
    "MsdTrace",
    "make_sparse_vector",
    "draw_system_vector",
    "generate_sample",
    "generate_instant",
    "snr_to_noise_var",
    "network_msd",
    "simulate_run",
    "run_experiment",
    "ComplexityInputs",
    "ComplexityCost",
    "ComplexityMethod",
    "complexity_eval",
]

MSD_FLOOR_DB = -320.0
_MSD_FLOOR_LINEAR = 1e-32

# stream tags separating the unknown-system draw from the data draws
_SYSTEM_TAG = 0
_SAMPLE_TAG = 1


# ---------------------------------------------------------------------------
# signal generation


@dataclass(frozen=True)
class SignalModel:
    """Data source d = w0^H x + n for one Monte-Carlo run.

    x entries and n are circular complex Gaussian with variances
    input_variance and noise_variance. seed/run key the streams; nodes
    fixes the number of per-instant rows.
    """

    system: np.ndarray
    input_variance: float = 1.0
    noise_variance: float = 0.0
    seed: int = 0
    run: int = 0
    nodes: int = 1

    def __post_init__(self):
        system = np.asarray(self.system, dtype=np.complex128)
        if system.ndim != 1 or system.size < 1:
            raise ValueError(f"system must be a nonempty vector, got shape {system.shape}")
        if not np.all(np.isfinite(system.view(np.float64))):
            raise ValueError("system entries must be finite")
        if self.input_variance <= 0.0:
            raise ValueError(f"input_variance must be > 0, got {self.input_variance:g}")
        if self.noise_variance < 0.0:
            raise ValueError(f"noise_variance must be >= 0, got {self.noise_variance:g}")
        if self.nodes < 1:
            raise ValueError(f"nodes must be >= 1, got {self.nodes}")
        object.__setattr__(self, "system", system)

    @property
    def taps(self) -> int:
        return self.system.shape[0]


def _instant_block(model: SignalModel, instant: int) -> np.ndarray:
    """Complex standard-normal block (nodes, taps+1) for one instant.

    Row k is the same for any node count > k, so per-node data depends
    only on (seed, run, k, instant).
    """
    rng = np.random.default_rng((model.seed, _SAMPLE_TAG, model.run, instant))
    z = rng.standard_normal((model.nodes, model.taps + 1, 2))
    return z[..., 0] + 1j * z[..., 1]


def generate_instant(model: SignalModel, instant: int):
    """Draw (x, d) for every node at one time instant.

    Returns x of shape (nodes, taps) and d of shape (nodes,).
    """
    block = _instant_block(model, instant)
    x = block[:, : model.taps] * np.sqrt(model.input_variance / 2.0)
    noise = block[:, model.taps] * np.sqrt(model.noise_variance / 2.0)
    d = (np.conj(model.system) * x).sum(axis=-1) + noise
    return x, d


def generate_sample(model: SignalModel, node: int, instant: int):
    """Draw (x, d) for one node; identical to the matching generate_instant row."""
    if not 0 <= node < model.nodes:
        raise ValueError(f"node must be in [0, {model.nodes}), got {node}")
    x, d = generate_instant(model, instant)
    return x[node], d[node]


def make_sparse_vector(taps: int, active: int, seed) -> np.ndarray:
    """Vector with exactly `active` entries equal to one at seeded positions."""
    if not 1 <= active <= taps:
        raise ValueError(f"active tap count must be in [1, {taps}], got {active}")
    rng = np.random.default_rng(seed)
    positions = rng.choice(taps, size=active, replace=False)
    out = np.zeros(taps, dtype=np.complex128)
    out[positions] = 1.0
    return out


def snr_to_noise_var(snr_db: float, system, input_variance: float) -> float:
    """Noise variance giving the requested SNR = ||w0||^2 sx^2 / sn^2."""
    system = np.asarray(system, dtype=np.complex128)
    power = float(np.real(np.conj(system) @ system))
    if power == 0.0:
        raise ValueError("SNR is undefined for a zero system vector")
    if not np.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db}")
    return power * float(input_variance) * 10.0 ** (-snr_db / 10.0)


def network_msd(estimates, system) -> float:
    """Average squared deviation (1/N) sum_k ||w0 - w_k||^2 in dB, floored."""
    estimates = np.atleast_2d(np.asarray(estimates, dtype=np.complex128))
    system = np.asarray(system, dtype=np.complex128)
    if estimates.shape[-1] != system.shape[-1]:
        raise DimensionMismatchError(
            f"estimates of dim {estimates.shape[-1]} do not match system dim {system.shape[-1]}"
        )
    diff = estimates - system
    linear = float(np.mean(np.real((np.conj(diff) * diff).sum(axis=-1))))
    if linear <= _MSD_FLOOR_LINEAR:
        return MSD_FLOOR_DB
    return float(10.0 * np.log10(linear))


# ---------------------------------------------------------------------------
# experiment configuration


class SparsityKind(str, Enum):
    DENSE = "dense"
    SPARSE = "sparse"


@dataclass(frozen=True)
class SparsitySpec:
    """Unknown-system prior: dense random entries or a few unit taps."""

    kind: SparsityKind = SparsityKind.DENSE
    active_taps: int = 2

    def __post_init__(self):
        aliases = {"dense-random": "dense", "k-sparse": "sparse"}
        raw = str(getattr(self.kind, "value", self.kind)).lower()
        object.__setattr__(self, "kind", SparsityKind(aliases.get(raw, raw)))
        if self.active_taps < 1:
            raise ValueError(f"active_taps must be >= 1, got {self.active_taps}")


@dataclass(frozen=True)
class TopologySpec:
    """Graph construction knobs; defaults resolve against the experiment."""

    extra_edges: int | None = None
    seed: int | None = None
    combiner: str = "metropolis"

    def __post_init__(self):
        if self.combiner not in ("metropolis", "identity"):
            raise ValueError(
                f"combiner must be 'metropolis' or 'identity', got {self.combiner!r}"
            )
        if self.extra_edges is not None and self.extra_edges < 0:
            raise ValueError(f"extra_edges must be >= 0, got {self.extra_edges}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one Monte-Carlo experiment."""

    engine: Engine
    protocol: Protocol
    nodes: int = 20
    taps: int = 10
    iterations: int = 1000
    runs: int = 100
    snr_db: float = 30.0
    input_variance: float = 1.0
    seed: int = 0
    label: str | None = None
    sparsity: SparsitySpec = field(default_factory=SparsitySpec)
    topology: TopologySpec = field(default_factory=TopologySpec)
    params: EngineParams = field(default_factory=EngineParams)

    def __post_init__(self):
        engine = str(getattr(self.engine, "value", self.engine)).lower()
        protocol = str(getattr(self.protocol, "value", self.protocol)).lower()
        object.__setattr__(self, "engine", Engine(engine))
        object.__setattr__(self, "protocol", Protocol(protocol))
        for name in ("nodes", "taps", "iterations", "runs"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value!r}")
        for name in ("snr_db", "input_variance"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.number)):
                raise ValueError(f"{name} must be a number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not np.isfinite(self.snr_db):
            raise ValueError(f"snr_db must be finite, got {self.snr_db}")
        if self.input_variance <= 0.0:
            raise ValueError(f"input_variance must be > 0, got {self.input_variance:g}")
        if self.sparsity.kind is SparsityKind.SPARSE and self.sparsity.active_taps > self.taps:
            raise ValueError(
                f"active_taps={self.sparsity.active_taps} exceeds taps={self.taps}"
            )
        if self.topology.extra_edges is not None:
            n = self.nodes
            ring = 0 if n == 1 else (1 if n == 2 else n)
            spare = n * (n - 1) // 2 - ring
            if self.topology.extra_edges > spare:
                raise ValueError(
                    f"extra_edges={self.topology.extra_edges} exceeds the {spare} "
                    f"chords available with {n} nodes"
                )

    def resolved_label(self) -> str:
        if self.label:
            return self.label
        prefix = ""
        if self.params.penalty.active:
            prefix = self.params.penalty.kind.value.upper() + "-"
        proto = {"cta": "CTA", "atc": "ATC", "noncooperative": "NC"}[self.protocol.value]
        return f"{prefix}{proto}-{self.engine.value.upper()}"

    def combiner_weights(self) -> np.ndarray | None:
        """Combiner matrix for this experiment; None when non-cooperative."""
        if self.protocol is Protocol.NONCOOPERATIVE:
            return None
        if self.topology.combiner == "identity":
            return identity_weights(self.nodes)
        return metropolis_weights(self.build_topology())

    def build_topology(self):
        if self.topology.extra_edges is None:
            # as many random chords as nodes, clamped for tiny rings
            n = self.nodes
            ring = 0 if n == 1 else (1 if n == 2 else n)
            extra = min(n, n * (n - 1) // 2 - ring)
        else:
            extra = self.topology.extra_edges
        seed = self.seed if self.topology.seed is None else self.topology.seed
        return build_topology(self.nodes, extra, seed)


@dataclass(frozen=True)
class MsdTrace:
    """Learning curve: network MSD in dB per iteration, run-averaged."""

    values: np.ndarray
    label: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise ValueError("MSD trace must be finite everywhere")
        object.__setattr__(self, "values", values)

    def steady_state(self, tail: int = 100) -> float:
        """Mean of the final `tail` values (dB)."""
        return float(np.mean(self.values[-tail:]))


def draw_system_vector(config: ExperimentConfig, run: int) -> np.ndarray:
    """Per-run unknown system: fresh draw keyed by (seed, run)."""
    key = (config.seed, _SYSTEM_TAG, run)
    if config.sparsity.kind is SparsityKind.SPARSE:
        return make_sparse_vector(config.taps, config.sparsity.active_taps, key)
    rng = np.random.default_rng(key)
    z = rng.standard_normal((config.taps, 2))
    return (z[:, 0] + 1j * z[:, 1]) / np.sqrt(2.0)


def simulate_run(config: ExperimentConfig, run: int, weights=None) -> np.ndarray:
    """One Monte-Carlo run; returns the linear MSD per time instant.

    `weights` may carry a prebuilt combiner to avoid rebuilding the
    topology per run; it is ignored for the non-cooperative protocol.
    """
    system = draw_system_vector(config, run)
    noise_var = snr_to_noise_var(config.snr_db, system, config.input_variance)
    model = SignalModel(
        system,
        input_variance=config.input_variance,
        noise_variance=noise_var,
        seed=config.seed,
        run=run,
        nodes=config.nodes,
    )
    if weights is None:
        weights = config.combiner_weights()
    state = init_state(config.taps, config.params.diag_load, nodes=config.nodes)
    out = np.empty(config.iterations, dtype=np.float64)
    for i in range(config.iterations):
        x, d = generate_instant(model, i)
        state = network_step(
            config.protocol, state, weights, x, d, config.params, config.engine
        )
        diff = state.weights - system
        out[i] = np.mean(np.real((np.conj(diff) * diff).sum(axis=-1)))
    return out


def run_experiment(config: ExperimentConfig) -> MsdTrace:
    """Monte-Carlo average: per-instant linear MSD over runs, then dB."""
    weights = config.combiner_weights()
    total = np.zeros(config.iterations, dtype=np.float64)
    for run in range(config.runs):
        total += simulate_run(config, run, weights)
    mean_linear = total / config.runs
    values = np.full(config.iterations, MSD_FLOOR_DB)
    above = mean_linear > _MSD_FLOOR_LINEAR
    values[above] = 10.0 * np.log10(mean_linear[above])
    return MsdTrace(values=values, label=config.resolved_label())


# ---------------------------------------------------------------------------
# arithmetic cost formulas


class ComplexityMethod(str, Enum):
    CTA_CG = "cta-cg"
    ATC_CG = "atc-cg"
    CTA_MCG = "cta-mcg"
    ATC_MCG = "atc-mcg"
    ZA_CTA_CG = "za-cta-cg"
    ZA_ATC_CG = "za-atc-cg"
    ZA_CTA_MCG = "za-cta-mcg"
    ZA_ATC_MCG = "za-atc-mcg"
    RZA_CTA_CG = "rza-cta-cg"
    RZA_ATC_CG = "rza-atc-cg"
    RZA_CTA_MCG = "rza-cta-mcg"
    RZA_ATC_MCG = "rza-atc-mcg"


@dataclass(frozen=True)
class ComplexityInputs:
    """Arguments of the cost polynomials: filter length M, inner
    iterations J, node count L."""

    taps: int
    inner_iters: int = 1
    nodes: int = 1

    def __post_init__(self):
        for name in ("taps", "inner_iters", "nodes"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value!r}")


class ComplexityCost(NamedTuple):
    additions: int
    multiplications: int


# (additions, multiplications) per method as exact integer polynomials in
# (M, J, L). The two MCG multiplication rows marked below omit the leading
# L in the source table; it is restored for consistency with every other
# row.
_COMPLEXITY_ROWS = {
    ComplexityMethod.CTA_CG: (
        lambda m, j, l: l * (m * m + 2 * m) + l * j * (2 * m * m + 6 * m - 3),
        lambda m, j, l: l * (2 * m * m + 4 * m) + l * j * (3 * m * m + 4 * m - 1),
    ),
    ComplexityMethod.ATC_CG: (
        lambda m, j, l: l * (m * m + 3 * m - 1) + l * j * (m * m + 6 * m - 3),
        lambda m, j, l: l * (2 * m * m + 3 * m) + l * j * (3 * m * m + 4 * m - 1),
    ),
    ComplexityMethod.CTA_MCG: (
        lambda m, j, l: l * (3 * m * m + 9 * m - 4),
        lambda m, j, l: l * (4 * m * m + 9 * m - 1),
    ),
    ComplexityMethod.ATC_MCG: (
        lambda m, j, l: l * (4 * m * m + 9 * m - 3),
        lambda m, j, l: l * (6 * m * m + 8 * m - 1),
    ),
    ComplexityMethod.ZA_CTA_CG: (
        lambda m, j, l: l * (m * m + 3 * m) + l * j * (2 * m * m + 6 * m - 3),
        lambda m, j, l: l * (2 * m * m + 5 * m) + l * j * (3 * m * m + 4 * m - 1),
    ),
    ComplexityMethod.ZA_ATC_CG: (
        lambda m, j, l: l * (m * m + 3 * m) + l * j * (2 * m * m + 6 * m - 3),
        lambda m, j, l: l * (2 * m * m + 5 * m) + l * j * (3 * m * m + 4 * m - 1),
    ),
    ComplexityMethod.ZA_CTA_MCG: (
        lambda m, j, l: l * (3 * m * m + 10 * m - 4),
        lambda m, j, l: l * (4 * m * m + 10 * m - 1),  # L restored
    ),
    ComplexityMethod.ZA_ATC_MCG: (
        lambda m, j, l: l * (4 * m * m + 10 * m - 3),
        lambda m, j, l: l * (6 * m * m + 9 * m - 1),  # L restored
    ),
    ComplexityMethod.RZA_CTA_CG: (
        lambda m, j, l: l * (m * m + 2 * m) + l * j * (2 * m * m + 8 * m - 3),
        lambda m, j, l: l * (2 * m * m + 4 * m) + l * j * (3 * m * m + 6 * m - 1),
    ),
    ComplexityMethod.RZA_ATC_CG: (
        lambda m, j, l: l * (m * m + 3 * m - 1) + l * j * (2 * m * m + 8 * m - 3),
        lambda m, j, l: l * (2 * m * m + 3 * m) + l * j * (3 * m * m + 6 * m - 1),
    ),
    ComplexityMethod.RZA_CTA_MCG: (
        lambda m, j, l: l * (3 * m * m + 11 * m - 4),
        lambda m, j, l: l * (4 * m * m + 11 * m - 1),
    ),
    ComplexityMethod.RZA_ATC_MCG: (
        lambda m, j, l: l * (4 * m * m + 11 * m - 3),
        lambda m, j, l: l * (6 * m * m + 10 * m - 1),
    ),
}


def complexity_eval(method: ComplexityMethod, inputs: ComplexityInputs) -> ComplexityCost:
    """Exact per-instant operation counts for one method."""
    adds, mults = _COMPLEXITY_ROWS[ComplexityMethod(method)]
    m, j, l = int(inputs.taps), int(inputs.inner_iters), int(inputs.nodes)
    return ComplexityCost(int(adds(m, j, l)), int(mults(m, j, l)))
