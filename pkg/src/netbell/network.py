"""Multi-source network model, JSON file format, and example-network gallery.

A network is a set of parties and a set of independent sources.  Each source
distributes one entangled resource; its ``recipients`` list names, particle by
particle, which party receives each subsystem.  Particle-level recipients are
the primitive so that one party may hold several particles of the same or of
different sources.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .paulis import pauli_string_matrix

NORM_TOL = 1e-9
NORM_REPAIR_TOL = 1e-6
PSD_TOL = 1e-9

SQRT_HALF = 1.0 / math.sqrt(2.0)


class NetworkError(ValueError):
    """A topology or resource violates a structural invariant."""


class NetworkParseError(NetworkError):
    """Malformed network file (syntax), with line/column when available."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


# ---------------------------------------------------------------------------
# Resource descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneralizedEPR:
    """Two-qubit pure state a|00> + b|11| with a^2 + b^2 = 1, a, b >= 0."""

    a: float
    b: float

    @property
    def arity(self) -> int:
        return 2

    @property
    def particle_dims(self) -> tuple[int, ...]:
        return (2, 2)


@dataclass(frozen=True)
class SchmidtBlockBipartite:
    """Bipartite pure state with a distinguished 2x2 Schmidt block.

    The state is a|00> + b|11> plus orthogonal Schmidt terms carrying the tail
    weights, so a^2 + b^2 may be < 1.  Each side is realised with one extra
    orthogonal level (local dimension 3) that carries the whole tail mass.
    """

    a: float
    b: float
    tail_weights: tuple[float, ...]

    @property
    def arity(self) -> int:
        return 2

    @property
    def particle_dims(self) -> tuple[int, ...]:
        return (3, 3)

    @property
    def tail_mass(self) -> float:
        return float(sum(w * w for w in self.tail_weights))


@dataclass(frozen=True)
class GeneralizedGHZ:
    """s-qubit pure state a_hat|0...0> + b_hat|1...1>, s >= 3, normalized."""

    a_hat: float
    b_hat: float
    arity: int

    @property
    def particle_dims(self) -> tuple[int, ...]:
        return (2,) * self.arity


@dataclass(frozen=True)
class Werner:
    """Visibility-v mixture of a pure EPR/GHZ state with white noise."""

    base: Union[GeneralizedEPR, GeneralizedGHZ]
    visibility: float

    @property
    def arity(self) -> int:
        return self.base.arity

    @property
    def particle_dims(self) -> tuple[int, ...]:
        return self.base.particle_dims


@dataclass(frozen=True)
class PauliCoefficientState:
    """Mixed s-qubit state given by real coefficients of Pauli strings.

    ``coefficients`` maps index strings over the characters ``1, x, y, z``
    (one per qubit) to real values; unspecified entries are 0 and the
    all-identity entry is fixed at 1.  The reconstructed density matrix must
    be positive semidefinite.
    """

    arity: int
    coefficients: dict[str, float] = field(default_factory=dict)

    @property
    def particle_dims(self) -> tuple[int, ...]:
        return (2,) * self.arity

    @property
    def identity_index(self) -> str:
        return "1" * self.arity

    def coefficient(self, index: str) -> float:
        if index == self.identity_index:
            return 1.0
        return float(self.coefficients.get(index, 0.0))

    def density_matrix(self) -> np.ndarray:
        dim = 2**self.arity
        rho = np.eye(dim, dtype=complex)
        for index, value in self.coefficients.items():
            if index == self.identity_index:
                continue
            rho += value * pauli_string_matrix(index)
        return rho / dim


ResourceSpec = Union[
    GeneralizedEPR, SchmidtBlockBipartite, GeneralizedGHZ, Werner, PauliCoefficientState
]


def _check_unit_sum(kind: str, amplitudes: list[float]) -> float:
    """Return the rescale factor that restores sum-of-squares = 1.

    Exact inputs pass through; drifts up to NORM_REPAIR_TOL are renormalized;
    anything worse is rejected so badly scaled inputs surface as errors.
    """
    total = sum(x * x for x in amplitudes)
    if abs(total - 1.0) <= NORM_TOL:
        return 1.0
    if abs(total - 1.0) <= NORM_REPAIR_TOL:
        return 1.0 / math.sqrt(total)
    raise NetworkError(f"{kind}: squared amplitudes sum to {total:.9g}, expected 1")


def validate_resource(resource: ResourceSpec) -> ResourceSpec:
    """Validate a resource descriptor, renormalizing tiny drifts.

    Returns the (possibly renormalized) resource; raises NetworkError on any
    invariant violation.
    """
    if isinstance(resource, GeneralizedEPR):
        if resource.a < 0 or resource.b < 0:
            raise NetworkError("epr: amplitudes must be nonnegative")
        s = _check_unit_sum("epr", [resource.a, resource.b])
        return replace(resource, a=resource.a * s, b=resource.b * s)

    if isinstance(resource, SchmidtBlockBipartite):
        amps = [resource.a, resource.b, *resource.tail_weights]
        if any(x < 0 for x in amps):
            raise NetworkError("schmidt: amplitudes must be nonnegative")
        s = _check_unit_sum("schmidt", amps)
        return replace(
            resource,
            a=resource.a * s,
            b=resource.b * s,
            tail_weights=tuple(w * s for w in resource.tail_weights),
        )

    if isinstance(resource, GeneralizedGHZ):
        if resource.arity < 3:
            raise NetworkError(f"ghz: arity must be >= 3, got {resource.arity}")
        if resource.a_hat < 0 or resource.b_hat < 0:
            raise NetworkError("ghz: amplitudes must be nonnegative")
        s = _check_unit_sum("ghz", [resource.a_hat, resource.b_hat])
        return replace(resource, a_hat=resource.a_hat * s, b_hat=resource.b_hat * s)

    if isinstance(resource, Werner):
        if not isinstance(resource.base, (GeneralizedEPR, GeneralizedGHZ)):
            raise NetworkError("werner: base must be an EPR or GHZ state")
        if not 0.0 <= resource.visibility <= 1.0:
            raise NetworkError(f"werner: visibility {resource.visibility} outside [0, 1]")
        return replace(resource, base=validate_resource(resource.base))

    if isinstance(resource, PauliCoefficientState):
        if resource.arity < 2:
            raise NetworkError(f"pauli: arity must be >= 2, got {resource.arity}")
        for index, value in resource.coefficients.items():
            if len(index) != resource.arity or any(ch not in "1xyz" for ch in index):
                raise NetworkError(f"pauli: bad index string {index!r} for arity {resource.arity}")
            if abs(value) > 1.0 + NORM_TOL:
                raise NetworkError(f"pauli: coefficient {index!r}={value} outside [-1, 1]")
        identity = resource.coefficients.get(resource.identity_index)
        if identity is not None and abs(identity - 1.0) > NORM_TOL:
            raise NetworkError("pauli: all-identity coefficient must equal 1")
        eigenvalues = np.linalg.eigvalsh(resource.density_matrix())
        if eigenvalues.min() < -PSD_TOL:
            raise NetworkError(
                f"pauli: reconstructed density matrix is not positive semidefinite "
                f"(minimum eigenvalue {eigenvalues.min():.3e})"
            )
        return resource

    raise NetworkError(f"unknown resource type {type(resource).__name__}")


# ---------------------------------------------------------------------------
# Topology
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Source:
    id: str
    resource: ResourceSpec
    recipients: tuple[str, ...]


@dataclass(frozen=True)
class NetworkTopology:
    parties: tuple[str, ...]
    sources: tuple[Source, ...]

    def __post_init__(self):
        if len(self.parties) < 2:
            raise NetworkError("a network needs at least 2 parties")
        if len(self.sources) < 1:
            raise NetworkError("a network needs at least 1 source")
        if len(set(self.parties)) != len(self.parties):
            raise NetworkError("duplicate party identifiers")
        ids = [s.id for s in self.sources]
        if len(set(ids)) != len(ids):
            raise NetworkError("duplicate source identifiers")
        validated = []
        receiving: set[str] = set()
        party_set = set(self.parties)
        for source in self.sources:
            resource = validate_resource(source.resource)
            if len(source.recipients) != resource.arity:
                raise NetworkError(
                    f"source {source.id}: {len(source.recipients)} recipients for a "
                    f"{resource.arity}-particle resource"
                )
            for r in source.recipients:
                if r not in party_set:
                    raise NetworkError(f"source {source.id}: unknown recipient {r!r}")
            receiving.update(source.recipients)
            validated.append(replace(source, resource=resource, recipients=tuple(source.recipients)))
        isolated = [p for p in self.parties if p not in receiving]
        if isolated:
            raise NetworkError(f"isolated parties receive no particle: {isolated}")
        object.__setattr__(self, "parties", tuple(self.parties))
        object.__setattr__(self, "sources", tuple(validated))

    @property
    def n(self) -> int:
        return len(self.parties)

    @property
    def m(self) -> int:
        return len(self.sources)

    def party_sources(self, party: str) -> tuple[str, ...]:
        """Identifiers of the sources that deliver at least one particle to party."""
        out = []
        for source in self.sources:
            if party in source.recipients:
                out.append(source.id)
        return tuple(out)

    def total_dimension(self) -> int:
        dim = 1
        for source in self.sources:
            for d in source.resource.particle_dims:
                dim *= d
        return dim

    def has_mixed_resource(self) -> bool:
        return any(isinstance(s.resource, (Werner, PauliCoefficientState)) for s in self.sources)


# ---------------------------------------------------------------------------
# JSON file format
# ---------------------------------------------------------------------------


def _resource_to_json(resource: ResourceSpec) -> dict:
    if isinstance(resource, GeneralizedEPR):
        return {"kind": "epr", "a": resource.a, "b": resource.b}
    if isinstance(resource, SchmidtBlockBipartite):
        return {
            "kind": "schmidt",
            "a": resource.a,
            "b": resource.b,
            "tail_weights": list(resource.tail_weights),
        }
    if isinstance(resource, GeneralizedGHZ):
        return {"kind": "ghz", "a_hat": resource.a_hat, "b_hat": resource.b_hat, "arity": resource.arity}
    if isinstance(resource, Werner):
        return {
            "kind": "werner",
            "base": _resource_to_json(resource.base),
            "visibility": resource.visibility,
        }
    if isinstance(resource, PauliCoefficientState):
        return {
            "kind": "pauli",
            "arity": resource.arity,
            "coefficients": {k: resource.coefficients[k] for k in sorted(resource.coefficients)},
        }
    raise NetworkError(f"unknown resource type {type(resource).__name__}")


_RESOURCE_FIELDS = {
    "epr": {"kind", "a", "b"},
    "schmidt": {"kind", "a", "b", "tail_weights"},
    "ghz": {"kind", "a_hat", "b_hat", "arity"},
    "werner": {"kind", "base", "visibility"},
    "pauli": {"kind", "arity", "coefficients"},
}


def _resource_from_json(obj: object, where: str) -> ResourceSpec:
    if not isinstance(obj, dict):
        raise NetworkError(f"{where}: resource must be an object")
    kind = obj.get("kind")
    if kind not in _RESOURCE_FIELDS:
        raise NetworkError(f"{where}: unknown resource kind {kind!r}")
    unknown = set(obj) - _RESOURCE_FIELDS[kind]
    if unknown:
        raise NetworkError(f"{where}: unknown resource keys {sorted(unknown)}")
    missing = _RESOURCE_FIELDS[kind] - set(obj)
    if missing:
        raise NetworkError(f"{where}: missing resource keys {sorted(missing)}")
    try:
        if kind == "epr":
            return GeneralizedEPR(a=float(obj["a"]), b=float(obj["b"]))
        if kind == "schmidt":
            return SchmidtBlockBipartite(
                a=float(obj["a"]),
                b=float(obj["b"]),
                tail_weights=tuple(float(w) for w in obj["tail_weights"]),
            )
        if kind == "ghz":
            return GeneralizedGHZ(a_hat=float(obj["a_hat"]), b_hat=float(obj["b_hat"]), arity=int(obj["arity"]))
        if kind == "werner":
            return Werner(
                base=_resource_from_json(obj["base"], where + ".base"),
                visibility=float(obj["visibility"]),
            )
        coefficients = obj["coefficients"]
        if not isinstance(coefficients, dict):
            raise NetworkError(f"{where}: pauli coefficients must be an object")
        return PauliCoefficientState(
            arity=int(obj["arity"]),
            coefficients={str(k): float(v) for k, v in coefficients.items()},
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, NetworkError):
            raise
        raise NetworkError(f"{where}: bad field value ({exc})") from exc


def parse_network(text: str | bytes) -> NetworkTopology:
    """Parse and validate a network file (UTF-8 JSON)."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkParseError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(data, dict):
        raise NetworkError("top-level value must be an object")
    unknown = set(data) - {"parties", "sources"}
    if unknown:
        raise NetworkError(f"unknown top-level keys {sorted(unknown)}")
    parties = data.get("parties")
    sources = data.get("sources")
    if not isinstance(parties, list) or not all(isinstance(p, str) for p in parties):
        raise NetworkError("'parties' must be an array of strings")
    if not isinstance(sources, list):
        raise NetworkError("'sources' must be an array of objects")
    parsed_sources = []
    for i, entry in enumerate(sources):
        where = f"sources[{i}]"
        if not isinstance(entry, dict):
            raise NetworkError(f"{where}: must be an object")
        unknown = set(entry) - {"id", "resource", "recipients"}
        if unknown:
            raise NetworkError(f"{where}: unknown keys {sorted(unknown)}")
        if not isinstance(entry.get("id"), str):
            raise NetworkError(f"{where}: missing string 'id'")
        recipients = entry.get("recipients")
        if not isinstance(recipients, list) or not all(isinstance(r, str) for r in recipients):
            raise NetworkError(f"{where}: 'recipients' must be an array of strings")
        resource = _resource_from_json(entry.get("resource"), where + ".resource")
        parsed_sources.append(Source(id=entry["id"], resource=resource, recipients=tuple(recipients)))
    return NetworkTopology(parties=tuple(parties), sources=tuple(parsed_sources))


def serialize(net: NetworkTopology) -> str:
    """Serialize a topology to the JSON network format (round-trips parse_network)."""
    data = {
        "parties": list(net.parties),
        "sources": [
            {
                "id": s.id,
                "resource": _resource_to_json(s.resource),
                "recipients": list(s.recipients),
            }
            for s in net.sources
        ],
    }
    return json.dumps(data, indent=2)


# ---------------------------------------------------------------------------
# Gallery
# ---------------------------------------------------------------------------


def _epr_max() -> GeneralizedEPR:
    return GeneralizedEPR(SQRT_HALF, SQRT_HALF)


def _ghz_max(arity: int) -> GeneralizedGHZ:
    return GeneralizedGHZ(SQRT_HALF, SQRT_HALF, arity)


def _chain(n: int) -> NetworkTopology:
    parties = tuple(f"A{i}" for i in range(1, n + 1))
    sources = tuple(
        Source(f"S{i}", _epr_max(), (f"A{i}", f"A{i + 1}")) for i in range(1, n)
    )
    return NetworkTopology(parties, sources)


def _cycle(n: int) -> NetworkTopology:
    parties = tuple(f"A{i}" for i in range(1, n + 1))
    sources = tuple(
        Source(f"S{i}", _epr_max(), (f"A{i}", f"A{i % n + 1}")) for i in range(1, n + 1)
    )
    return NetworkTopology(parties, sources)


def _hybrid_star(n: int) -> NetworkTopology:
    # Reconstruction of the hybrid star: four 4-partite GHZ states whose
    # fourth legs anchor both ends of an EPR chain C1..Cn.  The maximum
    # independent set is {A1..A4} plus every other interior chain party,
    # giving k = 4 + floor((n-1)/2).
    parties = [f"A{i}" for i in range(1, 5)] + [f"B{i}" for i in range(1, 5)]
    parties += [f"C{i}" for i in range(1, n + 1)]
    sources = [
        Source(f"G{i}", _ghz_max(4), (f"A{i}", f"B{i}", "C1", f"C{n}")) for i in range(1, 5)
    ]
    sources += [Source(f"S{i}", _epr_max(), (f"C{i}", f"C{i + 1}")) for i in range(1, n)]
    return NetworkTopology(tuple(parties), tuple(sources))


def _hybrid_multiloop(n: int) -> NetworkTopology:
    # Two n-partite GHZ states bridged by n EPR pairs; every observer holds
    # two particles and exactly k=2 independent observers exist.
    parties = [f"U{i}" for i in range(1, n + 1)] + [f"V{i}" for i in range(1, n + 1)]
    sources = [
        Source("GU", _ghz_max(n), tuple(f"U{i}" for i in range(1, n + 1))),
        Source("GV", _ghz_max(n), tuple(f"V{i}" for i in range(1, n + 1))),
    ]
    sources += [Source(f"S{i}", _epr_max(), (f"U{i}", f"V{i}")) for i in range(1, n + 1)]
    return NetworkTopology(tuple(parties), tuple(sources))


def _fig_s2() -> NetworkTopology:
    # Five parties, seven EPR sources.  The certified outcome is k=2 with
    # independent parties {A1, A2}.  Source memberships A1={S1,S5},
    # A2={S2,S3,S6}, A5={S4,S5,S7} follow the worked matching; the edges of
    # A3 and A4 are a reconstruction chosen so that no larger independent
    # set exists.
    parties = ("A1", "A2", "A3", "A4", "A5")
    membership = {
        "S1": ("A1", "A3"),
        "S2": ("A2", "A3"),
        "S3": ("A2", "A4"),
        "S4": ("A4", "A5"),
        "S5": ("A1", "A5"),
        "S6": ("A2", "A3"),
        "S7": ("A4", "A5"),
    }
    sources = tuple(Source(sid, _epr_max(), pair) for sid, pair in membership.items())
    return NetworkTopology(parties, sources)


def _two_loop() -> NetworkTopology:
    # One 4-partite GHZ ringed by four EPR pairs forming two loops through
    # the outer parties A and B; k=2 with {A, B} independent.
    parties = ("A", "B", "C1", "C2", "C3", "C4")
    sources = (
        Source("G", _ghz_max(4), ("C1", "C2", "C3", "C4")),
        Source("S1", _epr_max(), ("A", "C1")),
        Source("S2", _epr_max(), ("A", "C2")),
        Source("S3", _epr_max(), ("B", "C3")),
        Source("S4", _epr_max(), ("B", "C4")),
    )
    return NetworkTopology(parties, sources)


def _butterfly() -> NetworkTopology:
    # Butterfly-shaped reconstruction: one 4-partite GHZ across the middle
    # and sinks, five EPR pairs on the wings; k=3.
    parties = ("s1", "s2", "m1", "m2", "t1", "t2")
    sources = (
        Source("G", _ghz_max(4), ("m1", "m2", "t1", "t2")),
        Source("S1", _epr_max(), ("s1", "m1")),
        Source("S2", _epr_max(), ("s2", "m1")),
        Source("S3", _epr_max(), ("s1", "t1")),
        Source("S4", _epr_max(), ("s2", "t2")),
        Source("S5", _epr_max(), ("m1", "m2")),
    )
    return NetworkTopology(parties, sources)


def _boat() -> NetworkTopology:
    # Boat reconstruction: four 4-partite GHZ states tied to a shared hull
    # of parties X1..X4, each with a two-EPR outrigger chain; k=5.
    parties = [f"X{i}" for i in range(1, 5)]
    parties += [f"Y{i}" for i in range(1, 5)] + [f"Z{i}" for i in range(1, 5)]
    sources = [Source(f"G{i}", _ghz_max(4), ("X1", "X2", "X3", "X4")) for i in range(1, 5)]
    sources += [Source(f"S{i}", _epr_max(), (f"X{i}", f"Y{i}")) for i in range(1, 5)]
    sources += [Source(f"T{i}", _epr_max(), (f"Y{i}", f"Z{i}")) for i in range(1, 5)]
    return NetworkTopology(tuple(parties), tuple(sources))


def _tri_ghz() -> NetworkTopology:
    # Cyclic network of two 3-partite GHZ states and one EPR pair; every
    # pair of parties shares a source, so no k>=2 independent set exists.
    parties = ("A", "B", "C")
    sources = (
        Source("G1", _ghz_max(3), ("A", "B", "C")),
        Source("G2", _ghz_max(3), ("A", "B", "C")),
        Source("S1", _epr_max(), ("A", "B")),
    )
    return NetworkTopology(parties, sources)


def _symmetric_cycle() -> NetworkTopology:
    # One 4-partite GHZ and two 3-partite GHZ states over four parties;
    # k_max = 1.
    parties = ("A", "B", "C", "D")
    sources = (
        Source("G1", _ghz_max(4), ("A", "B", "C", "D")),
        Source("G2", _ghz_max(3), ("A", "B", "C")),
        Source("G3", _ghz_max(3), ("B", "C", "D")),
    )
    return NetworkTopology(parties, sources)


def _door() -> NetworkTopology:
    # Three 4-partite GHZ states over the same four parties (each observer
    # holds three particles); k_max = 1.
    parties = ("A", "B", "C", "D")
    sources = tuple(Source(f"G{i}", _ghz_max(4), parties) for i in range(1, 4))
    return NetworkTopology(parties, sources)


# name -> (builder, minimum n or None for fixed entries)
GALLERY = {
    "chain": (_chain, 2),
    "hybrid-star": (_hybrid_star, 2),
    "cycle": (_cycle, 3),
    "hybrid-multiloop": (_hybrid_multiloop, 3),
    "fig-s2": (_fig_s2, None),
    "two-loop": (_two_loop, None),
    "butterfly": (_butterfly, None),
    "boat": (_boat, None),
    "triangle": (_cycle, None),  # cycle(3)
    "tri-ghz": (_tri_ghz, None),
    "symmetric-cycle": (_symmetric_cycle, None),
    "door": (_door, None),
}

_GALLERY_NAME_RE = re.compile(r"^([a-z0-9-]+?)(?:\((\d+)\))?$")


def gallery_names() -> list[str]:
    return sorted(GALLERY)


def gallery(name: str) -> NetworkTopology:
    """Return a named example network with maximally entangled resources.

    Parameterized entries are written ``chain(5)``; ``triangle`` is the
    three-party EPR ring.
    """
    match = _GALLERY_NAME_RE.match(name.strip())
    if not match:
        raise NetworkError(f"malformed gallery name {name!r}")
    base, arg = match.group(1), match.group(2)
    if base not in GALLERY:
        raise NetworkError(f"unknown gallery entry {base!r}; known: {', '.join(gallery_names())}")
    builder, minimum = GALLERY[base]
    if minimum is None:
        if arg is not None:
            raise NetworkError(f"gallery entry {base!r} takes no parameter")
        if base == "triangle":
            return builder(3)
        return builder()
    if arg is None:
        raise NetworkError(f"gallery entry {base!r} needs a parameter, e.g. {base}(4)")
    n = int(arg)
    if n < minimum:
        raise NetworkError(f"gallery entry {base!r} needs n >= {minimum}, got {n}")
    return builder(n)
