"""Dense state construction, dichotomic observables, and correlation values.

Every observable is a short sum of slot-wise product terms over the global
particle slots (source declaration order, recipient order within a source).
Slot factors are labeled z, x, p, or identity; on a qubit slot these are the
Pauli matrices and I2, on a dimension-3 slot they are the block operators
diag(1,-1,0), the 0<->1 flip, and the block projector diag(1,1,0).

The same term lists drive three evaluation paths: per-source scalar products
(the factorized production path), statevector application, and dense-matrix
traces for mixed resources.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .independence import IndependenceCertificate
from .network import (
    GeneralizedEPR,
    GeneralizedGHZ,
    NetworkTopology,
    PauliCoefficientState,
    SchmidtBlockBipartite,
    Source,
    Werner,
)

PURE_DIM_CAP = 2**22
MIXED_DIM_CAP = 2**12
IMAG_TOL = 1e-9

_Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
_X2 = np.array([[0, 1], [1, 0]], dtype=complex)
_I2 = np.eye(2, dtype=complex)
_Z3 = np.diag([1.0, -1.0, 0.0]).astype(complex)
_X3 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
_P3 = np.diag([1.0, 1.0, 0.0]).astype(complex)
_I3 = np.eye(3, dtype=complex)

_SLOT_MATRICES = {
    (2, "z"): _Z2,
    (2, "x"): _X2,
    (2, "p"): _I2,
    (2, "i"): _I2,
    (3, "z"): _Z3,
    (3, "x"): _X3,
    (3, "p"): _P3,
    (3, "i"): _I3,
}


def slot_matrix(dim: int, label: str) -> np.ndarray:
    return _SLOT_MATRICES[(dim, label)]


class DimensionCapError(RuntimeError):
    """Requested full-tensor computation exceeds the configured cap."""


# ---------------------------------------------------------------------------
# Layout and states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StateLayout:
    """Global slot bookkeeping: dims, owning party, and source per slot."""

    dims: tuple[int, ...]
    owner: tuple[str, ...]
    source_index: tuple[int, ...]
    source_slots: tuple[tuple[int, ...], ...]


def build_layout(net: NetworkTopology) -> StateLayout:
    dims: list[int] = []
    owner: list[str] = []
    source_index: list[int] = []
    source_slots: list[tuple[int, ...]] = []
    for j, source in enumerate(net.sources):
        slots = []
        for pos, recipient in enumerate(source.recipients):
            slots.append(len(dims))
            dims.append(source.resource.particle_dims[pos])
            owner.append(recipient)
            source_index.append(j)
        source_slots.append(tuple(slots))
    return StateLayout(tuple(dims), tuple(owner), tuple(source_index), tuple(source_slots))


def source_pure_vector(resource) -> np.ndarray:
    """Amplitude vector for a pure resource, slot order as declared."""
    if isinstance(resource, GeneralizedEPR):
        vec = np.zeros(4, dtype=complex)
        vec[0] = resource.a
        vec[3] = resource.b
        return vec
    if isinstance(resource, SchmidtBlockBipartite):
        # Tail mass is carried by one orthogonal level per side on |22>.
        vec = np.zeros(9, dtype=complex)
        vec[0] = resource.a
        vec[4] = resource.b
        vec[8] = math.sqrt(resource.tail_mass)
        return vec
    if isinstance(resource, GeneralizedGHZ):
        dim = 2**resource.arity
        vec = np.zeros(dim, dtype=complex)
        vec[0] = resource.a_hat
        vec[-1] = resource.b_hat
        return vec
    raise TypeError(f"{type(resource).__name__} is not a pure resource")


def source_density(resource) -> np.ndarray:
    if isinstance(resource, Werner):
        psi = source_pure_vector(resource.base)
        dim = psi.size
        v = resource.visibility
        return v * np.outer(psi, psi.conj()) + (1.0 - v) / dim * np.eye(dim, dtype=complex)
    if isinstance(resource, PauliCoefficientState):
        return resource.density_matrix()
    psi = source_pure_vector(resource)
    return np.outer(psi, psi.conj())


def is_mixed_resource(resource) -> bool:
    return isinstance(resource, (Werner, PauliCoefficientState))


@dataclass
class QuantumState:
    """Global state: amplitude tensor for pure networks, density otherwise."""

    layout: StateLayout
    vector: np.ndarray | None = None
    density: np.ndarray | None = None

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    @property
    def dimension(self) -> int:
        return int(np.prod(self.layout.dims))


def build_state(net: NetworkTopology, dim_cap: int | None = None) -> QuantumState:
    """Tensor product over sources in declaration order."""
    layout = build_layout(net)
    dim = int(np.prod(layout.dims))
    mixed = net.has_mixed_resource()
    cap = dim_cap if dim_cap is not None else (MIXED_DIM_CAP if mixed else PURE_DIM_CAP)
    if dim > cap:
        raise DimensionCapError(
            f"total dimension {dim} exceeds the cap {cap} for "
            f"{'mixed' if mixed else 'pure'} networks"
        )
    if mixed:
        rho = np.array([[1.0 + 0j]])
        for source in net.sources:
            rho = np.kron(rho, source_density(source.resource))
        return QuantumState(layout, density=rho)
    vec = np.array([1.0 + 0j])
    for source in net.sources:
        vec = np.kron(vec, source_pure_vector(source.resource))
    return QuantumState(layout, vector=vec.reshape(layout.dims))


# ---------------------------------------------------------------------------
# Operators as sums of slot-wise product terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProductTerm:
    coeff: float
    factors: tuple[tuple[int, str], ...]  # (slot, label), slot-sorted

    def factor_map(self) -> dict[int, str]:
        return dict(self.factors)


@dataclass(frozen=True)
class SlotOperator:
    """Hermitian operator with designated support slots."""

    slots: tuple[int, ...]
    terms: tuple[ProductTerm, ...]

    def apply(self, psi: np.ndarray, dims: tuple[int, ...]) -> np.ndarray:
        out = np.zeros_like(psi)
        for term in self.terms:
            cur = psi
            for slot, label in term.factors:
                mat = slot_matrix(dims[slot], label)
                cur = np.tensordot(mat, cur, axes=([1], [slot]))
                cur = np.moveaxis(cur, 0, slot)
            out = out + term.coeff * cur
        return out

    def dense(self, dims: tuple[int, ...]) -> np.ndarray:
        """Dense matrix on the full space spanned by ``dims``."""
        total = int(np.prod(dims))
        out = np.zeros((total, total), dtype=complex)
        for term in self.terms:
            fmap = term.factor_map()
            mat = np.array([[1.0 + 0j]])
            for slot, dim in enumerate(dims):
                mat = np.kron(mat, slot_matrix(dim, fmap.get(slot, "i")))
            out += term.coeff * mat
        return out


def _term(coeff: float, factors: dict[int, str]) -> ProductTerm:
    return ProductTerm(coeff, tuple(sorted(factors.items())))


# ---------------------------------------------------------------------------
# Partition bookkeeping
# ---------------------------------------------------------------------------


def _is_bipartite(source: Source) -> bool:
    return source.resource.arity == 2


def _is_parity_ghz(source: Source) -> bool:
    """States whose z-strings must carry an even number of z factors."""
    resource = source.resource
    if isinstance(resource, Werner):
        resource = resource.base
    return isinstance(resource, GeneralizedGHZ)


@dataclass
class PartyPartition:
    """One independent party's shared sources and slot assignments."""

    party: str
    shared_sources: list[int]
    a_slots: list[int] = field(default_factory=list)
    b_slots: list[int] = field(default_factory=list)
    insertion_slot: int | None = None
    insertion_source: int | None = None

    @property
    def k_slots(self) -> int:
        return len(self.a_slots)


@dataclass
class PartitionIndex:
    layout: StateLayout
    parties: list[PartyPartition]
    remainder_sources: list[int]
    excluded_sources: list[int]


def build_partition(net: NetworkTopology, cert: IndependenceCertificate) -> PartitionIndex:
    """Assign every source to one independent party or the remainder.

    Sources delivering all particles to a single party are locally prepared
    and excluded from the observables (they contribute a factor 1).
    """
    layout = build_layout(net)
    independent = list(cert.independent_parties)
    claimed: dict[int, str] = {}
    excluded: list[int] = []
    for j, source in enumerate(net.sources):
        holders = set(source.recipients)
        touching = [p for p in independent if p in holders]
        if len(touching) > 1:
            raise ValueError(
                f"certificate is inconsistent: source {source.id} is shared by "
                f"independent parties {touching}"
            )
        if touching:
            if len(holders) == 1:
                excluded.append(j)
            else:
                claimed[j] = touching[0]
    parties = []
    for party in independent:
        shared = [j for j, p in claimed.items() if p == party]
        pp = PartyPartition(party=party, shared_sources=sorted(shared))
        bip_a: list[int] = []
        ghz_a: list[int] = []
        for j in pp.shared_sources:
            for slot in layout.source_slots[j]:
                if layout.owner[slot] == party:
                    (bip_a if _is_bipartite(net.sources[j]) else ghz_a).append(slot)
                else:
                    pp.b_slots.append(slot)
        pp.a_slots = bip_a + ghz_a
        if pp.k_slots == 0:
            raise ValueError(f"independent party {party} shares no source with the rest")
        if pp.k_slots % 2 == 0:
            # Even slot count breaks the z/x anticommutation needed for
            # A^2 = I; one z factor becomes a block identity, preferably on
            # the last bipartite slot so GHZ parities are untouched.
            pp.insertion_slot = bip_a[-1] if bip_a else ghz_a[-1]
            pp.insertion_source = layout.source_index[pp.insertion_slot]
        parties.append(pp)
    remainder = [
        j
        for j in range(net.m)
        if j not in claimed and j not in excluded
    ]
    return PartitionIndex(layout, parties, remainder, excluded)


# ---------------------------------------------------------------------------
# Observable construction
# ---------------------------------------------------------------------------


def _schmidt_slots(net: NetworkTopology, layout: StateLayout, slots: list[int]) -> list[int]:
    return [s for s in slots if layout.dims[s] == 3]


def _block_complement_terms(p_slots: list[int]) -> list[ProductTerm]:
    """Terms of I - P where P projects every listed slot onto its 2x2 block."""
    if not p_slots:
        return []
    return [_term(1.0, {}), _term(-1.0, {s: "p" for s in p_slots})]


def _party_z_maps(
    net: NetworkTopology, partition: PartitionIndex, pp: PartyPartition
) -> tuple[dict[int, str], dict[int, str]]:
    """z-type factor maps for A (party side) and B_{i,0} (shared remote side).

    For each pure GHZ-family state the total z count over both sides must be
    even; when it is odd, one remote z becomes an identity.  Pauli coefficient
    states keep full z-strings so their z..z coefficients enter unmodified.
    """
    layout = partition.layout
    a_map = {s: "z" for s in pp.a_slots}
    if pp.insertion_slot is not None:
        a_map[pp.insertion_slot] = "p"
    b_map = {s: "z" for s in pp.b_slots}
    if pp.insertion_source is not None and _is_bipartite(net.sources[pp.insertion_source]):
        for s in layout.source_slots[pp.insertion_source]:
            if s in b_map:
                b_map[s] = "p"
    for j in pp.shared_sources:
        if not _is_parity_ghz(net.sources[j]):
            continue
        slots = layout.source_slots[j]
        z_count = sum(1 for s in slots if a_map.get(s) == "z" or b_map.get(s) == "z")
        if z_count % 2 == 1:
            for s in reversed(slots):
                if b_map.get(s) == "z":
                    b_map[s] = "i"
                    break
    return a_map, b_map


def build_A(
    net: NetworkTopology,
    partition: PartitionIndex,
    pp: PartyPartition,
    x: int,
    theta: float,
) -> SlotOperator:
    """Dichotomic observable of one independent party."""
    a_map, _ = _party_z_maps(net, partition, pp)
    x_map = {s: "x" for s in pp.a_slots}
    terms = [
        _term(math.cos(theta), a_map),
        _term((-1) ** x * math.sin(theta), x_map),
    ]
    terms += _block_complement_terms(_schmidt_slots(net, partition.layout, pp.a_slots))
    return SlotOperator(tuple(pp.a_slots), tuple(terms))


def build_B_shared(
    net: NetworkTopology, partition: PartitionIndex, pp: PartyPartition, y: int
) -> SlotOperator:
    """Remote-side block B_{i,y} on the sources shared with one party."""
    _, b_zmap = _party_z_maps(net, partition, pp)
    if y == 0:
        terms = [_term(1.0, b_zmap)]
    else:
        terms = [_term(1.0, {s: "x" for s in pp.b_slots})]
    terms += _block_complement_terms(_schmidt_slots(net, partition.layout, pp.b_slots))
    return SlotOperator(tuple(pp.b_slots), tuple(terms))


def build_B_rest(net: NetworkTopology, partition: PartitionIndex, y: int) -> SlotOperator:
    """Block B_{r,y} on all sources not shared with independent parties."""
    layout = partition.layout
    slots: list[int] = []
    z_map: dict[int, str] = {}
    for j in partition.remainder_sources:
        source_slots = list(layout.source_slots[j])
        slots += source_slots
        for s in source_slots:
            z_map[s] = "z"
        if _is_parity_ghz(net.sources[j]) and len(source_slots) % 2 == 1:
            z_map[source_slots[-1]] = "i"
    if y == 0:
        terms = [_term(1.0, z_map)]
    else:
        terms = [_term(1.0, {s: "x" for s in slots})]
    terms += _block_complement_terms(_schmidt_slots(net, layout, slots))
    return SlotOperator(tuple(slots), tuple(terms))


@dataclass
class ObservableSet:
    """All operators for one certificate and angle vector."""

    partition: PartitionIndex
    angles: tuple[float, ...]
    A: dict[tuple[str, int], SlotOperator]
    B_shared: dict[tuple[str, int], SlotOperator]
    B_rest: dict[int, SlotOperator]


def build_observables(
    net: NetworkTopology, cert: IndependenceCertificate, angles: tuple[float, ...]
) -> ObservableSet:
    partition = build_partition(net, cert)
    if len(angles) != len(partition.parties):
        raise ValueError(f"expected {len(partition.parties)} angles, got {len(angles)}")
    A = {}
    B_shared = {}
    for pp, theta in zip(partition.parties, angles):
        for x in (0, 1):
            A[(pp.party, x)] = build_A(net, partition, pp, x, theta)
        for y in (0, 1):
            B_shared[(pp.party, y)] = build_B_shared(net, partition, pp, y)
    B_rest = {y: build_B_rest(net, partition, y) for y in (0, 1)}
    return ObservableSet(partition, tuple(angles), A, B_shared, B_rest)


# ---------------------------------------------------------------------------
# Expectation values
# ---------------------------------------------------------------------------


def _real(value: complex, what: str) -> float:
    if abs(value.imag) > IMAG_TOL:
        raise ValueError(f"{what} has imaginary residue {value.imag:.3e}")
    return float(value.real)


def expectation(state: QuantumState, operators: list[SlotOperator]) -> float:
    """Expectation of a product of commuting operators on disjoint slots."""
    seen: set[int] = set()
    for op in operators:
        overlap = seen & set(op.slots)
        if overlap:
            raise ValueError(f"operators overlap on slots {sorted(overlap)}")
        seen |= set(op.slots)
    dims = state.layout.dims
    if state.is_pure:
        psi = state.vector
        cur = psi
        for op in operators:
            cur = op.apply(cur, dims)
        value = np.vdot(psi, cur)
    else:
        total = state.density
        product = None
        for op in operators:
            mat = op.dense(dims)
            product = mat if product is None else product @ mat
        if product is None:
            value = np.trace(total)
        else:
            value = np.trace(total @ product)
    return _real(complex(value), "expectation value")


class _SourceExpectationCache:
    """Per-source scalar expectations of slot-label maps, memoized."""

    def __init__(self, net: NetworkTopology, layout: StateLayout):
        self.net = net
        self.layout = layout
        self._states: dict[int, tuple[str, np.ndarray]] = {}
        self._cache: dict[tuple[int, tuple[tuple[int, str], ...]], float] = {}

    def _state(self, j: int) -> tuple[str, np.ndarray]:
        if j not in self._states:
            resource = self.net.sources[j].resource
            if is_mixed_resource(resource):
                self._states[j] = ("mixed", source_density(resource))
            else:
                self._states[j] = ("pure", source_pure_vector(resource))
        return self._states[j]

    def value(self, j: int, labels: tuple[tuple[int, str], ...]) -> float:
        key = (j, labels)
        if key in self._cache:
            return self._cache[key]
        slots = self.layout.source_slots[j]
        label_map = dict(labels)
        mat = np.array([[1.0 + 0j]])
        for s in slots:
            mat = np.kron(mat, slot_matrix(self.layout.dims[s], label_map.get(s, "i")))
        kind, state = self._state(j)
        if kind == "pure":
            value = complex(np.vdot(state, mat @ state))
        else:
            value = complex(np.trace(state @ mat))
        result = _real(value, f"source {self.net.sources[j].id} factor")
        self._cache[key] = result
        return result

    def term_product(self, term_factors: dict[int, str], sources: list[int]) -> float:
        out = 1.0
        for j in sources:
            labels = tuple(
                (s, term_factors[s]) for s in self.layout.source_slots[j] if s in term_factors
            )
            out *= self.value(j, labels)
        return out


def _pair_expectation(
    cache: _SourceExpectationCache, left: SlotOperator, right: SlotOperator, sources: list[int]
) -> float:
    total = 0.0
    for ta in left.terms:
        fa = ta.factor_map()
        for tb in right.terms:
            merged = dict(fa)
            merged.update(tb.factor_map())
            total += ta.coeff * tb.coeff * cache.term_product(merged, sources)
    return total


def _single_expectation(
    cache: _SourceExpectationCache, op: SlotOperator, sources: list[int]
) -> float:
    total = 0.0
    for term in op.terms:
        total += term.coeff * cache.term_product(term.factor_map(), sources)
    return total


def party_factors(
    net: NetworkTopology, obs: ObservableSet, cache: _SourceExpectationCache | None = None
) -> tuple[list[float], list[float], float, float]:
    """Per-party averaged correlators and the remainder factors.

    Returns (fI per party, fJ per party, rI, rJ) with
    I = rI * prod(fI) and J = rJ * prod(fJ).
    """
    partition = obs.partition
    if cache is None:
        cache = _SourceExpectationCache(net, partition.layout)
    f_i: list[float] = []
    f_j: list[float] = []
    for pp in partition.parties:
        sources = pp.shared_sources
        vi = 0.0
        vj = 0.0
        for x in (0, 1):
            a_op = obs.A[(pp.party, x)]
            vi += 0.5 * _pair_expectation(cache, a_op, obs.B_shared[(pp.party, 0)], sources)
            vj += 0.5 * (-1) ** x * _pair_expectation(
                cache, a_op, obs.B_shared[(pp.party, 1)], sources
            )
        f_i.append(vi)
        f_j.append(vj)
    r_i = _single_expectation(cache, obs.B_rest[0], partition.remainder_sources)
    r_j = _single_expectation(cache, obs.B_rest[1], partition.remainder_sources)
    return f_i, f_j, r_i, r_j


def factorized_IJ(
    net: NetworkTopology, cert: IndependenceCertificate, angles: tuple[float, ...]
) -> tuple[float, float]:
    """I and J via per-source scalar factors (exact for product resources)."""
    obs = build_observables(net, cert, angles)
    f_i, f_j, r_i, r_j = party_factors(net, obs)
    return float(r_i * np.prod(f_i)), float(r_j * np.prod(f_j))


def full_tensor_IJ(
    net: NetworkTopology,
    cert: IndependenceCertificate,
    angles: tuple[float, ...],
    dim_cap: int | None = None,
) -> tuple[float, float]:
    """Literal sum over the 2^k settings on the global state."""
    obs = build_observables(net, cert, angles)
    state = build_state(net, dim_cap)
    parties = [pp.party for pp in obs.partition.parties]
    k = len(parties)
    value_i = 0.0
    value_j = 0.0
    for setting in range(2**k):
        bits = [(setting >> i) & 1 for i in range(k)]
        ops_i = [obs.A[(p, b)] for p, b in zip(parties, bits)]
        ops_i += [obs.B_shared[(p, 0)] for p in parties] + [obs.B_rest[0]]
        ops_j = [obs.A[(p, b)] for p, b in zip(parties, bits)]
        ops_j += [obs.B_shared[(p, 1)] for p in parties] + [obs.B_rest[1]]
        sign = (-1) ** sum(bits)
        value_i += expectation(state, ops_i)
        value_j += sign * expectation(state, ops_j)
    scale = 1.0 / 2**k
    return value_i * scale, value_j * scale


def factor_constants(
    net: NetworkTopology, cert: IndependenceCertificate
) -> tuple[list[tuple[float, float]], list[float], float, float]:
    """Angle-independent constants of the per-party factors.

    fI_i(theta) = z_i cos(theta) + u_i and fJ_i(theta) = x_i sin(theta), so
    three probe evaluations recover (z_i, u_i) and x_i for every party.
    These drive the fast angle optimization.
    """
    probe0 = build_observables(net, cert, (0.0,) * len(cert.independent_parties))
    cache = _SourceExpectationCache(net, probe0.partition.layout)
    half_pi = math.pi / 2
    f0, _, r_i, r_j = party_factors(net, probe0, cache)
    probe1 = build_observables(net, cert, (half_pi,) * len(cert.independent_parties))
    f1, g1, _, _ = party_factors(net, probe1, cache)
    cos_parts = [(f0[i] - f1[i], f1[i]) for i in range(len(f0))]
    sin_parts = list(g1)
    return cos_parts, sin_parts, r_i, r_j


def ij_from_constants(
    constants: tuple[list[tuple[float, float]], list[float], float, float],
    angles: tuple[float, ...],
) -> tuple[float, float]:
    cos_parts, sin_parts, r_i, r_j = constants
    value_i = r_i
    value_j = r_j
    for (z, u), x, theta in zip(cos_parts, sin_parts, angles):
        value_i *= z * math.cos(theta) + u
        value_j *= x * math.sin(theta)
    return value_i, value_j
