"""Fixed-step synchronous execution engine for wired block graphs.

Blocks expose named input and output ports.  A wire connects one output
port to any number of input ports, but every input port accepts at most
one driver.  Each simulation tick evaluates every block exactly once, in
an order derived from the wiring, so a block always sees the values its
upstream blocks produced on the same tick.  Feedback cycles must contain
a unit-delay element (``breaks_cycle``), which hands the previous tick's
value downstream; cycles without one are rejected as algebraic loops.

Two kinds of signal travel over the same wires:

* level - holds its value until the producing block rewrites it.
* pulse - set to 1.0 for exactly one tick, then cleared by the engine
  before the next tick's evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isfinite
from typing import Callable, Iterable, Sequence


class SimulationError(Exception):
    """Base class for engine and model errors."""


class UnknownPort(SimulationError):
    """A wire references a block or port that does not exist."""


class MultipleDrivers(SimulationError):
    """Two or more wires drive the same input port."""


class AlgebraicLoop(SimulationError):
    """A wiring cycle contains no unit-delay element."""


class NumericFault(SimulationError):
    """A block produced a non-finite output value."""

    def __init__(self, block: str, port: str, tick: int):
        super().__init__(f"non-finite value on {block}.{port} at tick {tick}")
        self.block = block
        self.port = port
        self.tick = tick


class TickBudgetExceeded(SimulationError):
    """The run consumed its tick budget without meeting its stop condition."""

    def __init__(self, tick: int, detail: str = ""):
        msg = f"tick budget exhausted at tick {tick}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.tick = tick


@dataclass(slots=True)
class SimClock:
    """Simulation time base.

    ``t`` is recomputed from the tick count on every advance, so repeated
    addition can never accumulate drift: t == tick_index * dt exactly.
    """

    dt: float
    tick_index: int = 0
    t: float = 0.0

    def advance(self) -> None:
        self.tick_index += 1
        self.t = self.tick_index * self.dt


class Block:
    """Base class for dataflow blocks.

    Subclasses declare ``input_ports`` and ``output_ports`` (tuples of
    names) plus the subset ``pulse_ports`` of outputs that carry one-tick
    pulses.  ``breaks_cycle`` marks delay-style blocks whose output does
    not depend on the current tick's inputs; only such blocks may close
    feedback loops.  Port values live in the plain dict ``out``.
    """

    input_ports: tuple[str, ...] = ()
    output_ports: tuple[str, ...] = ()
    pulse_ports: frozenset[str] = frozenset()
    breaks_cycle: bool = False

    def __init__(self, name: str):
        self.name = name
        self.out: dict[str, float] = {p: 0.0 for p in self.output_ports}
        self._sources: dict[str, tuple[dict[str, float], str]] = {}
        self._graph: BlockGraph | None = None

    def read(self, port: str) -> float:
        """Current value on an input port; unconnected inputs read 0."""
        ref = self._sources.get(port)
        if ref is None:
            return 0.0
        return ref[0][ref[1]]

    def pulse(self, port: str) -> None:
        """Raise a one-tick unit pulse on an output port."""
        self.out[port] = 1.0
        self._graph._fired.append((self.out, port))

    def request_halt(self) -> None:
        """Ask the engine to stop the run after the current tick."""
        self._graph._halt_requested = True

    def evaluate(self, clock: SimClock) -> None:
        """Compute this tick's outputs from current inputs and state."""

    def latch(self) -> None:
        """Deferred state update, run after every block has evaluated."""

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        return f"<{type(self).__name__} {self.name!r}>"


class BlockGraph:
    """A validated, executable wiring of block instances.

    Construct through :func:`build_graph`, which checks the wiring and
    fixes the per-tick evaluation order.
    """

    def __init__(self, blocks: dict[str, Block], plan: list[Block],
                 latch_plan: list[Block]):
        self._blocks = blocks
        self._plan = plan
        self._latch_plan = latch_plan
        self._fired: list[tuple[dict[str, float], str]] = []
        self._halt_requested = False
        self.halt_flag = False

    def block(self, name: str) -> Block:
        return self._blocks[name]

    def value(self, ref: str) -> float:
        """Read ``"block.PORT"`` as a float, for predicates and probes."""
        name, _, port = ref.partition(".")
        return self._blocks[name].out[port]

    def evaluation_order(self) -> list[str]:
        return [b.name for b in self._plan]

    def blocks(self) -> Iterable[Block]:
        return self._blocks.values()


def _parse_endpoint(ref: str) -> tuple[str, str]:
    name, sep, port = ref.partition(".")
    if not sep or not name or not port:
        raise UnknownPort(f"malformed port reference {ref!r}, expected 'block.PORT'")
    return name, port


def build_graph(blocks: Sequence[Block],
                wires: Sequence[tuple[str, str]]) -> BlockGraph:
    """Validate blocks and wires and fix a tick evaluation order.

    ``wires`` are ``("src.PORT", "dst.PORT")`` pairs.  The evaluation
    order is a topological sort over non-delayed edges; wires into a
    ``breaks_cycle`` block impose no ordering because such blocks consume
    their inputs after the tick, in :meth:`Block.latch`.
    """
    by_name: dict[str, Block] = {}
    for b in blocks:
        if b.name in by_name:
            raise MultipleDrivers(f"duplicate block name {b.name!r}")
        by_name[b.name] = b

    driven: set[tuple[str, str]] = set()
    edges: dict[str, set[str]] = {b.name: set() for b in blocks}
    for src_ref, dst_ref in wires:
        src_name, src_port = _parse_endpoint(src_ref)
        dst_name, dst_port = _parse_endpoint(dst_ref)
        src = by_name.get(src_name)
        dst = by_name.get(dst_name)
        if src is None or src_port not in src.out:
            raise UnknownPort(f"wire source {src_ref!r} does not exist")
        if dst is None or dst_port not in dst.input_ports:
            raise UnknownPort(f"wire destination {dst_ref!r} does not exist")
        if (dst_name, dst_port) in driven:
            raise MultipleDrivers(f"input {dst_ref!r} has more than one driver")
        driven.add((dst_name, dst_port))
        dst._sources[dst_port] = (src.out, src_port)
        if not dst.breaks_cycle:
            edges[src_name].add(dst_name)

    # Kahn topological sort; the seed queue follows insertion order so a
    # given construction is fully deterministic.
    indegree = {name: 0 for name in by_name}
    for outs in edges.values():
        for dst in outs:
            indegree[dst] += 1
    queue = [name for name in by_name if indegree[name] == 0]
    order: list[str] = []
    while queue:
        name = queue.pop(0)
        order.append(name)
        for dst in sorted(edges[name]):
            indegree[dst] -= 1
            if indegree[dst] == 0:
                queue.append(dst)
    if len(order) != len(by_name):
        cyclic = sorted(name for name, deg in indegree.items() if deg > 0)
        raise AlgebraicLoop(
            "wiring cycle without a unit delay involving: " + ", ".join(cyclic))

    plan = [by_name[name] for name in order]
    latch_plan = [b for b in plan if type(b).latch is not Block.latch]
    graph = BlockGraph(by_name, plan, latch_plan)
    for b in plan:
        b._graph = graph
    return graph


def step(graph: BlockGraph, clock: SimClock) -> SimClock:
    """Advance the simulation by one tick.

    Pulses emitted on the previous tick are cleared first, then every
    block evaluates once in plan order, then delay blocks latch.  A halt
    requested by any block takes effect after the tick completes.
    """
    fired = graph._fired
    if fired:
        for out, port in fired:
            out[port] = 0.0
        fired.clear()

    for b in graph._plan:
        b.evaluate(clock)
    for b in graph._latch_plan:
        b.latch()

    # Finite screen: v - v is 0.0 for every finite v and NaN for inf/NaN,
    # which keeps the per-tick cost of the check low.
    for b in graph._plan:
        for v in b.out.values():
            if v - v != 0.0:
                _raise_numeric_fault(graph, clock)

    clock.advance()
    if graph._halt_requested:
        graph.halt_flag = True
    return clock


def _raise_numeric_fault(graph: BlockGraph, clock: SimClock) -> None:
    for b in graph._plan:
        for port, v in b.out.items():
            if not isfinite(v):
                raise NumericFault(b.name, port, clock.tick_index)
    raise AssertionError("finite screen tripped without a non-finite port")


StopPredicate = Callable[[BlockGraph, SimClock], bool]
Observer = Callable[[BlockGraph, SimClock], None]


def run_until(graph: BlockGraph, clock: SimClock, predicate: StopPredicate,
              tick_budget: int = 1_000_000,
              observer: Observer | None = None) -> SimClock:
    """Step until ``predicate`` is true, a block halts the system, or the
    tick budget runs out (which raises :class:`TickBudgetExceeded`).

    ``predicate`` must be a pure function of port values and the clock.
    ``observer``, when given, runs after every completed tick.
    """
    if predicate(graph, clock):
        return clock
    steps = 0
    while not graph.halt_flag:
        if steps >= tick_budget:
            raise TickBudgetExceeded(clock.tick_index)
        step(graph, clock)
        steps += 1
        if observer is not None:
            observer(graph, clock)
        if predicate(graph, clock):
            break
    return clock
