"""Player behaviours: bipartite states plus question-indexed projective measurements.

A strategy holds a state on H_A x H_B and, per party, a map from question
kind to a projective measurement whose outcomes are answer strings over
{-1,+1}.  Observables for individual answer symbols are extracted once at
construction: the symbol projector sums all answer projectors agreeing at
one position, and the observable is the +1 projector minus the -1 projector.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .bitstrings import AdjacencyMatrix
from .linalg import (
    Observable,
    StateVector,
    STRUCTURAL_ATOL,
    graph_state,
    kron,
)

MY_FLAVOR = "my"
SPP_FLAVOR = "spp"

# Measurement directions in the X-Z plane: cos(angle) Z + sin(angle) X.
_BASIS_ANGLES = {"Z": 0.0, "X": math.pi / 2, "D": math.pi / 4, "E": 3 * math.pi / 4}


def basis_vectors(symbol: str) -> tuple[np.ndarray, np.ndarray]:
    """(+1, -1) eigenvectors of the single-qubit observable for a symbol."""
    theta = _BASIS_ANGLES[symbol]
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([c, s], dtype=complex), np.array([-s, c], dtype=complex)


@dataclass(frozen=True)
class Question:
    party: str  # "alice" | "bob"
    kind: str

    def __post_init__(self):
        if self.party not in ("alice", "bob"):
            raise ValueError(f"unknown party {self.party!r}")


class Measurement:
    """Projective measurement with answer-string-indexed projectors."""

    def __init__(self, projectors: Mapping[tuple[int, ...], np.ndarray]):
        if not projectors:
            raise ValueError("measurement needs at least one projector")
        items = [(tuple(int(x) for x in a), np.asarray(p, dtype=complex))
                 for a, p in projectors.items()]
        m = len(items[0][0])
        dim = items[0][1].shape[0]
        for a, p in items:
            if len(a) != m or any(x not in (-1, 1) for x in a):
                raise ValueError(f"bad answer string {a}")
            if p.shape != (dim, dim):
                raise ValueError(f"projector shape {p.shape} != ({dim}, {dim})")
        self.projectors = dict(items)
        self.num_symbols = m
        self.dim = dim

    def __iter__(self):
        return iter(self.projectors.items())


def symbol_projector(meas: Measurement, k: int, x: int) -> np.ndarray:
    """Projector onto answers whose k-th symbol equals x."""
    if not 1 <= k <= meas.num_symbols:
        raise ValueError(f"symbol index {k} out of range 1..{meas.num_symbols}")
    if x not in (-1, 1):
        raise ValueError(f"symbol value must be +-1, got {x}")
    total = np.zeros((meas.dim, meas.dim), dtype=complex)
    for a, p in meas:
        if a[k - 1] == x:
            total += p
    return total


def _symbol_observable_matrix(meas: Measurement, k: int) -> np.ndarray:
    return symbol_projector(meas, k, 1) - symbol_projector(meas, k, -1)


def observable_for_symbol(meas: Measurement, k: int, sites="local") -> Observable:
    """Hermitian unitary observable for the k-th answer symbol."""
    return Observable(_symbol_observable_matrix(meas, k), sites)


@dataclass(frozen=True)
class EpsilonBundle:
    """Error parameters feeding the robustness bound formulas."""

    eps: float = 0.0
    eps1: float = 0.0
    eps2: float = 0.0
    eps3: float = 0.0
    eps4: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        for name in ("eps", "eps1", "eps2", "eps3", "eps4", "delta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class NoiseSpec:
    """Noise applied to an honest strategy.

    theta rotates every projector of the listed parties by exp(-i*theta*Y)
    per qubit; w mixes the state with a seeded random unit vector.
    """

    theta: float = 0.0
    w: float = 0.0
    parties: tuple[str, ...] = ("alice", "bob")

    def __post_init__(self):
        if not abs(self.theta) <= math.pi:
            raise ValueError(f"theta {self.theta} outside [-pi, pi]")
        if not 0.0 <= self.w <= 1.0:
            raise ValueError(f"w {self.w} outside [0, 1]")
        if any(p not in ("alice", "bob") for p in self.parties):
            raise ValueError(f"unknown parties {self.parties}")


@dataclass(frozen=True, eq=False)
class Strategy:
    """Bipartite state plus per-party question -> measurement maps."""

    state: StateVector
    alice: dict[str, Measurement]
    bob: dict[str, Measurement]
    m: int

    def __post_init__(self):
        if len(self.state.layout) != 2:
            raise ValueError("strategy state needs a two-register (A, B) layout")
        if self.m < 1:
            raise ValueError(f"sub-test count must be positive, got {self.m}")
        for party, dim in (("alice", self.dim_a), ("bob", self.dim_b)):
            for kind, meas in getattr(self, party).items():
                if meas.dim != dim:
                    raise ValueError(
                        f"{party} measurement {kind!r} acts on dim {meas.dim}, "
                        f"party space is dim {dim}"
                    )
                if meas.num_symbols != self.m:
                    raise ValueError(
                        f"{party} measurement {kind!r} answers {meas.num_symbols} "
                        f"symbols, expected {self.m}"
                    )
        cache = {}
        for party in ("alice", "bob"):
            for kind, meas in getattr(self, party).items():
                for k in range(1, self.m + 1):
                    cache[(party, kind, k)] = _symbol_observable_matrix(meas, k)
        object.__setattr__(self, "_observables", cache)

    @property
    def dim_a(self) -> int:
        return self.state.dims[0]

    @property
    def dim_b(self) -> int:
        return self.state.dims[1]

    def measurement(self, party: str, kind: str) -> Measurement:
        table = getattr(self, party, None)
        if table is None or kind not in table:
            raise KeyError(f"strategy has no question {kind!r} for {party}")
        return table[kind]

    def observable(self, party: str, kind: str, k: int) -> np.ndarray:
        """Party-local observable for answer symbol k of a question."""
        try:
            return self._observables[(party, kind, k)]
        except KeyError:
            raise KeyError(
                f"no observable for party={party!r} kind={kind!r} k={k}"
            ) from None

    def kinds(self, party: str) -> tuple[str, ...]:
        return tuple(getattr(self, party).keys())


def ceil_log2(m: int) -> int:
    return (m - 1).bit_length()


def my_question_kinds(m: int) -> tuple[str, ...]:
    """Question kinds of the parallel pair test: X, Z, D plus the index families."""
    kinds = ["X", "Z", "D"]
    for j in range(1, ceil_log2(m) + 1):
        kinds.append(f"X{j}")
        kinds.append(f"Z{j}")
    return tuple(kinds)


def spp_question_kinds(m: int) -> tuple[str, ...]:
    """All 4^m symbol strings of the strictly parallel test."""
    return tuple(
        "".join(sym) for sym in itertools.product("XZDE", repeat=m)
    )


def all_symbol_kind(symbol: str, flavor: str, m: int) -> str:
    """The question kind whose every sub-test measures the given symbol."""
    if flavor == MY_FLAVOR:
        if symbol not in ("X", "Z", "D"):
            raise ValueError(f"symbol {symbol!r} has no dedicated question")
        return symbol
    if flavor == SPP_FLAVOR:
        return symbol * m
    raise ValueError(f"unknown flavor {flavor!r}")


def _index_bit(k: int, j: int) -> int:
    """Bit j of the sub-test index k, j=1 being the least significant."""
    return (k >> (j - 1)) & 1


def my_basis_string(kind: str, m: int) -> str:
    """Per-qubit measurement bases for one question of the pair test.

    The index families measure qubit k in X exactly when bit j of k is 1;
    both the X- and Z-labelled families follow this same published rule.
    """
    if kind in ("X", "Z", "D"):
        return kind * m
    family, j = kind[0], int(kind[1:])
    if family not in ("X", "Z") or not 1 <= j <= ceil_log2(m):
        raise ValueError(f"unknown question kind {kind!r}")
    return "".join("X" if _index_bit(k, j) else "Z" for k in range(1, m + 1))


def product_basis_measurement(bases: str) -> Measurement:
    """Measurement of each qubit in the eigenbasis named per position."""
    vecs = [basis_vectors(sym) for sym in bases]
    projectors = {}
    for answer in itertools.product((1, -1), repeat=len(bases)):
        vec = [vecs[i][0 if a == 1 else 1] for i, a in enumerate(answer)]
        mats = [np.outer(v, v.conj()) for v in vec]
        projectors[answer] = kron(*mats)
    return Measurement(projectors)


def _ebit_block_state(m: int) -> StateVector:
    """Graph state of m isolated edges, declared as an (A, B) bipartite state."""
    psi = graph_state(AdjacencyMatrix.half_swap(2 * m))
    return psi.with_layout((("A", 2**m), ("B", 2**m)))


def honest_my_strategy(m: int) -> Strategy:
    """Ideal behaviour for the parallel pair test on m e-bits."""
    if m < 1:
        raise ValueError(f"need at least one sub-test, got {m}")
    table = {
        kind: product_basis_measurement(my_basis_string(kind, m))
        for kind in my_question_kinds(m)
    }
    return Strategy(
        state=_ebit_block_state(m),
        alice=dict(table),
        bob=dict(table),
        m=m,
    )


def honest_spp_strategy(m: int) -> Strategy:
    """Ideal behaviour for the strictly parallel test on m e-bits."""
    if m < 1:
        raise ValueError(f"need at least one sub-test, got {m}")
    table = {
        kind: product_basis_measurement(kind) for kind in spp_question_kinds(m)
    }
    return Strategy(
        state=_ebit_block_state(m),
        alice=dict(table),
        bob=dict(table),
        m=m,
    )


def _rotation(theta: float, num_qubits: int) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    u1 = np.array([[c, -s], [s, c]], dtype=complex)  # exp(-i*theta*Y)
    return kron(*([u1] * num_qubits))


def perturb_strategy(s: Strategy, noise: NoiseSpec, seed: int = 0) -> Strategy:
    """Noisy but still valid strategy: rotated projectors, mixed state."""
    new_meas = {"alice": dict(s.alice), "bob": dict(s.bob)}
    if noise.theta:
        for party in noise.parties:
            dim = s.dim_a if party == "alice" else s.dim_b
            num_qubits = dim.bit_length() - 1
            if 2**num_qubits != dim:
                raise ValueError(
                    f"rotation noise needs a qubit party space, {party} has dim {dim}"
                )
            u = _rotation(noise.theta, num_qubits)
            new_meas[party] = {
                kind: Measurement(
                    {a: u @ p @ u.conj().T for a, p in meas}
                )
                for kind, meas in getattr(s, party).items()
            }
    amps = s.state.amps
    if noise.w:
        rng = np.random.default_rng(seed)
        r = rng.standard_normal(amps.size) + 1j * rng.standard_normal(amps.size)
        r /= np.linalg.norm(r)
        amps = (1.0 - noise.w) * amps + noise.w * r
        amps = amps / np.linalg.norm(amps)
    return Strategy(
        state=StateVector(amps, s.state.layout),
        alice=new_meas["alice"],
        bob=new_meas["bob"],
        m=s.m,
    )


@dataclass(frozen=True)
class CheckResult:
    name: str
    subject: str
    max_deviation: float
    passed: bool


@dataclass(frozen=True)
class StrategyValidation:
    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> tuple[CheckResult, ...]:
        return tuple(c for c in self.checks if not c.passed)


def validate_strategy(s: Strategy, atol: float = STRUCTURAL_ATOL) -> StrategyValidation:
    """Check completeness, orthogonality, observable structure, commutation.

    Never raises on a bad strategy; every deviation lands in the report.
    Cross-party commutation holds exactly by construction (different tensor
    factors); the embedded-matrix check asserts it on small systems.
    """
    checks = []

    def record(name, subject, dev):
        checks.append(CheckResult(name, subject, float(dev), bool(dev <= atol)))

    for party in ("alice", "bob"):
        for kind, meas in getattr(s, party).items():
            subject = f"{party}:{kind}"
            total = sum(p for _, p in meas)
            record("completeness", subject, np.abs(total - np.eye(meas.dim)).max())
            dev = 0.0
            projs = list(meas.projectors.items())
            for i, (a, pa) in enumerate(projs):
                for b, pb in projs[i:]:
                    prod = pa @ pb
                    ref = pa if a == b else 0.0
                    dev = max(dev, np.abs(prod - ref).max())
            record("orthogonality", subject, dev)
            herm = unit = comm = 0.0
            mats = [s.observable(party, kind, k) for k in range(1, s.m + 1)]
            for mk in mats:
                herm = max(herm, np.abs(mk - mk.conj().T).max())
                unit = max(unit, np.abs(mk @ mk - np.eye(meas.dim)).max())
            for i, mi in enumerate(mats):
                for mj in mats[i + 1:]:
                    comm = max(comm, np.abs(mi @ mj - mj @ mi).max())
            record("hermitian", subject, herm)
            record("unitary", subject, unit)
            record("same-question-commute", subject, comm)

    # Cross-party commutation of the embedded observables.  Capped to the
    # first few kinds per side so huge question sets stay affordable.
    if s.dim_a * s.dim_b <= 4096:
        dev = 0.0
        eye_a, eye_b = np.eye(s.dim_a), np.eye(s.dim_b)
        for kind_a in s.kinds("alice")[:4]:
            for kind_b in s.kinds("bob")[:4]:
                for k in range(1, s.m + 1):
                    ma = np.kron(s.observable("alice", kind_a, k), eye_b)
                    mb = np.kron(eye_a, s.observable("bob", kind_b, k))
                    dev = max(dev, np.abs(ma @ mb - mb @ ma).max())
        record("cross-party-commute", "alice x bob", dev)

    return StrategyValidation(tuple(checks))


# --- JSON serialization -----------------------------------------------------


def _interleave(a: np.ndarray) -> list[float]:
    flat = np.asarray(a, dtype=complex).ravel()
    out = np.empty(2 * flat.size)
    out[0::2] = flat.real
    out[1::2] = flat.imag
    return out.tolist()


def _deinterleave(values: Sequence[float], shape) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.size != 2 * math.prod(shape):
        raise ValueError(f"expected {2 * math.prod(shape)} floats, got {arr.size}")
    return (arr[0::2] + 1j * arr[1::2]).reshape(shape)


def strategy_to_json(s: Strategy) -> dict:
    questions = []
    for party in ("alice", "bob"):
        for kind, meas in getattr(s, party).items():
            questions.append(
                {
                    "party": party,
                    "kind": kind,
                    "projectors": [
                        {"answer": list(a), "matrix": _interleave(p)}
                        for a, p in meas
                    ],
                }
            )
    return {
        "dims": [s.dim_a, s.dim_b],
        "m": s.m,
        "state": _interleave(s.state.amps),
        "questions": questions,
    }


def strategy_from_json(doc: Mapping) -> Strategy:
    da, db = (int(d) for d in doc["dims"])
    m = int(doc["m"])
    amps = _deinterleave(doc["state"], (da * db,))
    tables = {"alice": {}, "bob": {}}
    for q in doc["questions"]:
        party, kind = q["party"], q["kind"]
        dim = da if party == "alice" else db
        projectors = {
            tuple(int(x) for x in entry["answer"]): _deinterleave(
                entry["matrix"], (dim, dim)
            )
            for entry in q["projectors"]
        }
        tables[party][kind] = Measurement(projectors)
    state = StateVector(amps, (("A", da), ("B", db)))
    return Strategy(state=state, alice=tables["alice"], bob=tables["bob"], m=m)


def load_strategy(doc: Mapping) -> Strategy:
    """Build a strategy from either serialized form or a named honest recipe."""
    if "type" in doc:
        kind = doc["type"]
        m = int(doc["m"])
        if kind == "honest-my":
            s = honest_my_strategy(m)
        elif kind == "honest-spp":
            s = honest_spp_strategy(m)
        else:
            raise ValueError(f"unknown strategy type {kind!r}")
        noise = doc.get("noise")
        if noise:
            spec = NoiseSpec(
                theta=float(noise.get("theta", 0.0)),
                w=float(noise.get("w", 0.0)),
            )
            s = perturb_strategy(s, spec, seed=int(noise.get("seed", 0)))
        return s
    return strategy_from_json(doc)
