"""Synchronous majority dynamics on odd-degree hosts.

Each step replaces every opinion with the sign of the sum of the
neighbours' opinions; odd degrees make the sign strict.  Trajectories are
eventually 2-periodic, and the stabilisation time

    tau = min { t : xi_{t+2} = xi_t pointwise }

is bounded by |E| - |V| / 2, so ``stabilise`` always terminates within
floor(|E| - |V|/2) + 2 steps and treats anything beyond as a hard bug.

Opinions are carried by :class:`OpinionVector`, an immutable bit-packed
vector (bit i set <=> vertex i holds +1).  The stepping engine itself works
on int8 sign arrays over the host's CSR adjacency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadVertexError,
    InvariantViolationError,
    LengthMismatchError,
    OpinionFormatError,
    PartitionError,
)


class OpinionVector:
    """Immutable opinion assignment, one bit per vertex (1 <=> +1)."""

    __slots__ = ("n", "bits")

    def __init__(self, n: int, bits: int):
        if n < 0 or bits < 0 or bits >> n:
            raise ValueError(f"bits out of range for n={n}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "bits", bits)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("OpinionVector is immutable")

    @classmethod
    def from_signs(cls, signs) -> "OpinionVector":
        arr = np.asarray(signs)
        packed = np.packbits(arr > 0, bitorder="little")
        return cls(int(arr.size), int.from_bytes(packed.tobytes(), "little"))

    @classmethod
    def from_string(cls, text: str) -> "OpinionVector":
        bad = set(text) - {"+", "-"}
        if bad:
            raise OpinionFormatError(
                f"opinion string may contain only '+' and '-', found {sorted(bad)!r}"
            )
        bits = 0
        for i, ch in enumerate(text):
            if ch == "+":
                bits |= 1 << i
        return cls(len(text), bits)

    @classmethod
    def filled(cls, n: int, opinion: int) -> "OpinionVector":
        return cls(n, (1 << n) - 1 if opinion > 0 else 0)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "OpinionVector":
        nbytes = (n + 7) // 8
        raw = int.from_bytes(rng.bytes(nbytes), "little")
        return cls(n, raw & ((1 << n) - 1))

    def sign(self, v: int) -> int:
        if not (0 <= v < self.n):
            raise BadVertexError(f"vertex {v} out of range for n={self.n}")
        return 1 if (self.bits >> v) & 1 else -1

    def to_signs(self) -> np.ndarray:
        nbytes = (self.n + 7) // 8
        raw = np.frombuffer(self.bits.to_bytes(nbytes, "little"), dtype=np.uint8)
        bits = np.unpackbits(raw, count=self.n, bitorder="little")
        return (bits.astype(np.int8) * 2) - 1

    def to_string(self) -> str:
        return "".join("+" if (self.bits >> i) & 1 else "-" for i in range(self.n))

    def negated(self) -> "OpinionVector":
        return OpinionVector(self.n, self.bits ^ ((1 << self.n) - 1))

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, OpinionVector):
            return NotImplemented
        return self.n == other.n and self.bits == other.bits

    def __hash__(self) -> int:
        return hash((self.n, self.bits))

    def __repr__(self) -> str:
        return f"OpinionVector({self.to_string()!r})"


def step_budget(host) -> int:
    """floor(|E| - |V|/2): upper bound on tau for any initial vector."""
    two_m = int(host.adj_flat.size)
    return (two_m - host.n) // 2


def _check_length(host, xi) -> None:
    if len(xi) != host.n:
        raise LengthMismatchError(
            f"expected {host.n} opinions, got {len(xi)}"
        )


def _step_signs(host, signs: np.ndarray) -> np.ndarray:
    gathered = signs[host.adj_flat].astype(np.int64)
    sums = np.add.reduceat(gathered, host.adj_offsets[:-1])
    return np.where(sums > 0, 1, -1).astype(np.int8)


def step(host, xi: OpinionVector) -> OpinionVector:
    """One synchronous majority update."""
    _check_length(host, xi)
    return OpinionVector.from_signs(_step_signs(host, xi.to_signs()))


class Trajectory:
    """Stateful run of the dynamics with flip bookkeeping.

    Keeps the three most recent states (enough to detect the first t with
    xi_{t+2} = xi_t) and per-vertex first/last flip times split by parity;
    a "flip at s" means xi_s(v) != xi_{s-2}(v) for s >= 2.  Full history is
    opt-in since it costs O(tau * n).
    """

    def __init__(self, host, xi0: OpinionVector, keep_history: bool = False):
        _check_length(host, xi0)
        self.host = host
        self.t = 0
        self.window: list[np.ndarray] = [xi0.to_signs()]
        self.first_flip = np.full(host.n, -1, dtype=np.int64)
        self.last_flip = np.full(host.n, -1, dtype=np.int64)
        self.last_flip_by_parity = [
            np.full(host.n, -1, dtype=np.int64) for _ in range(2)
        ]
        self.tau: int | None = None
        self.history: list[np.ndarray] | None = None
        if keep_history:
            self.history = [self.window[0]]

    def state(self, s: int | None = None) -> np.ndarray:
        if s is None:
            return self.window[-1]
        if self.history is not None:
            return self.history[s]
        offset = s - (self.t - len(self.window) + 1)
        if not (0 <= offset < len(self.window)):
            raise IndexError(f"state {s} outside retained window")
        return self.window[offset]

    def advance(self) -> None:
        new = _step_signs(self.host, self.window[-1])
        self.t += 1
        self.window.append(new)
        if len(self.window) > 3:
            self.window.pop(0)
        if self.history is not None:
            self.history.append(new)
        if self.t >= 2:
            changed = new != self.window[0]
            if changed.any():
                idx = np.flatnonzero(changed)
                self.last_flip[idx] = self.t
                self.last_flip_by_parity[self.t & 1][idx] = self.t
                fresh = idx[self.first_flip[idx] < 0]
                self.first_flip[fresh] = self.t
            elif self.tau is None:
                self.tau = self.t - 2

    def run_until_stable(self) -> int:
        limit = step_budget(self.host) + 2
        while self.tau is None:
            if self.t >= limit:
                raise InvariantViolationError(
                    f"no period-2 window within {limit} steps; "
                    "the dynamics engine is broken"
                )
            self.advance()
        return self.tau


@dataclass
class StabilisationResult:
    """Outcome of running the dynamics to its 2-periodic tail.

    stable_even / stable_odd are the opinions occupied at large even / odd
    times.  Flip arrays use -1 for "never".
    """

    tau: int
    steps_executed: int
    stable_even: OpinionVector
    stable_odd: OpinionVector
    first_flip: np.ndarray
    last_flip: np.ndarray
    last_flip_even: np.ndarray
    last_flip_odd: np.ndarray
    history: list[np.ndarray] | None = None

    def is_vertex_t_stable(self, v: int, t: int) -> bool:
        """No flip of v at a time of t's parity after t."""
        return int(self.last_flip_by_parity(t)[v]) <= t

    def last_flip_by_parity(self, t: int) -> np.ndarray:
        return self.last_flip_even if t % 2 == 0 else self.last_flip_odd


def stabilise(host, xi0: OpinionVector, keep_history: bool = False) -> StabilisationResult:
    """Run until xi_{t+2} = xi_t and report tau plus flip bookkeeping."""
    traj = Trajectory(host, xi0, keep_history=keep_history)
    tau = traj.run_until_stable()
    if int(traj.last_flip.max(initial=-1)) > tau + 1:
        raise InvariantViolationError("flip recorded after stabilisation")
    # Window now holds (xi_tau, xi_{tau+1}, xi_{tau+2}); split by parity.
    even_state = traj.window[0] if tau % 2 == 0 else traj.window[1]
    odd_state = traj.window[1] if tau % 2 == 0 else traj.window[0]
    return StabilisationResult(
        tau=tau,
        steps_executed=traj.t,
        stable_even=OpinionVector.from_signs(even_state),
        stable_odd=OpinionVector.from_signs(odd_state),
        first_flip=traj.first_flip,
        last_flip=traj.last_flip,
        last_flip_even=traj.last_flip_by_parity[0],
        last_flip_odd=traj.last_flip_by_parity[1],
        history=traj.history,
    )


def is_t_stable(host, xi0: OpinionVector, v: int, t: int) -> bool:
    """True iff xi_s(v) = xi_{s+2}(v) for every s >= t with s = t (mod 2)."""
    if not (0 <= v < host.n):
        raise BadVertexError(f"vertex {v} out of range for n={host.n}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return stabilise(host, xi0).is_vertex_t_stable(v, t)


def is_stable_partition(host, partition) -> bool:
    """True iff +1 on U / -1 on W is a fixed point of the dynamics.

    ``partition`` is a pair (U, W) of vertex collections that must split
    the host's vertex set exactly.
    """
    u_side, w_side = partition
    u_set, w_set = set(map(int, u_side)), set(map(int, w_side))
    if u_set & w_set:
        raise PartitionError(f"sides overlap at {sorted(u_set & w_set)[:5]}")
    if u_set | w_set != set(range(host.n)):
        raise PartitionError("sides must cover every vertex exactly once")
    signs = np.full(host.n, -1, dtype=np.int8)
    if u_set:
        signs[sorted(u_set)] = 1
    return bool(np.array_equal(_step_signs(host, signs), signs))
