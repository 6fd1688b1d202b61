"""The interactive repair loop.

A session holds the grammar being repaired, the facts recorded so far and
the prompts still waiting for an answer.  Rounds alternate between
prompting and rewriting: once every pending prompt of a round is
answered, a repair step compiles all recorded facts into a restriction
automaton, intersects it with the current grammar's automaton, adopts the
resulting grammar and re-analyzes it.  Facts persist across rounds, so a
conflict that resurfaces in rewritten form is resolved silently.

The loop ends with one of three verdicts: ``repaired`` when no conflicts
remain, ``non-addressable`` when some conflict cannot be posed as a
binary choice, and ``stalled`` when a step leaves the conflict picture
unchanged — rewriting further would keep producing the same grammar.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

from gramata.automata import AutomatonError, cfg_to_ta, ta_to_cfg
from gramata.examples import (
    Facts,
    Prompt,
    TreeExample,
    UnrealizableExampleError,
    partition_classes,
    plan_prompts,
    record_answer,
)
from gramata.grammar import Grammar, GrammarError, ranked_alphabet
from gramata.intersection import intersect
from gramata.learning import (
    LearningError,
    base_orders,
    build_order_map,
    build_restriction_ta,
    learn_orders,
)
from gramata.lr import build_lr1, classify_conflicts, detect_conflicts_in

IN_PROGRESS = "in-progress"
REPAIRED = "repaired"
STALLED = "stalled"
NON_ADDRESSABLE = "non-addressable"


class SessionError(RuntimeError):
    """Raised for out-of-order use of the session (e.g. stepping early)."""


@dataclass
class RepairReport:
    rounds: int
    prompts_issued: int
    verdict: str
    timings_ms: dict[str, float]
    residual_conflicts: int
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "rounds": self.rounds,
            "prompts_issued": self.prompts_issued,
            "verdict": self.verdict,
            "timings_ms": {k: round(v, 3) for k, v in self.timings_ms.items()},
            "residual_conflicts": self.residual_conflicts,
            "notes": list(self.notes),
        }


class RepairSession:
    """Drives analysis, prompting and rewriting for one grammar."""

    def __init__(self, grammar: Grammar, intersect_mode: str = "default"):
        self.original = grammar
        self.current = grammar
        self.intersect_mode = intersect_mode
        self.facts = Facts()
        self.rejected: list[TreeExample] = []
        self.round = 0
        self.max_rounds = max(1, len(ranked_alphabet(grammar)) ** 2)
        self.verdict = IN_PROGRESS
        self.notes: list[str] = []
        self.history: list[dict] = []
        self.learning_log: list[dict] = []
        self.timings = {"conversion": 0.0, "learning": 0.0, "intersection": 0.0}
        self._ids: dict[tuple[str, tuple[str, str]], int] = {}
        self._next_id = 0
        self._pending: list[Prompt] = []
        self._fingerprint: tuple | None = None
        self._analyze()

    # -- analysis ---------------------------------------------------------

    def _analyze(self) -> None:
        lr = build_lr1(self.current)
        self.conflicts = detect_conflicts_in(lr)
        self.classes, self.failures = classify_conflicts(
            self.current, self.conflicts, lr
        )
        if not self.conflicts:
            self.verdict = REPAIRED
            self._pending = []
            return
        if self.failures:
            self.verdict = NON_ADDRESSABLE
            for f in self.failures:
                note = f"cannot pose as a binary choice: {f.reason}"
                if note not in self.notes:
                    self.notes.append(note)
            self._pending = []
            return
        self._plan()

    def _plan(self) -> None:
        try:
            planned = plan_prompts(self.current, self.classes, self.facts)
        except UnrealizableExampleError as exc:
            self.verdict = NON_ADDRESSABLE
            self.notes.append(f"cannot pose as a binary choice: {exc}")
            self._pending = []
            return
        stable: list[Prompt] = []
        for p in planned:
            key = (p.kind, p.pair)
            if key not in self._ids:
                self._ids[key] = self._next_id
                self._next_id += 1
            stable.append(replace(p, id=self._ids[key]))
        self._pending = stable

    def fingerprint(self) -> tuple:
        pairs = tuple(sorted((cc.kind,) + cc.key for cc in self.classes))
        return (pairs, len(self.conflicts))

    # -- prompting --------------------------------------------------------

    @property
    def pending(self) -> list[Prompt]:
        return list(self._pending)

    def next_prompt(self) -> Prompt | None:
        return self._pending[0] if self._pending else None

    def answer(self, prompt_id: int, choice: int) -> None:
        """Record one answer; contradictory choices are rejected whole."""
        if self.verdict != IN_PROGRESS:
            raise SessionError(f"session is finished ({self.verdict})")
        if choice not in (0, 1):
            raise SessionError("choice must be 0 or 1")
        for p in self._pending:
            if p.id == prompt_id:
                rejected = record_answer(self.current, self.facts, p, choice)
                self.rejected.append(rejected)
                self.history.append(
                    {
                        "id": p.id,
                        "kind": p.kind,
                        "pair": list(p.pair),
                        "choice": choice,
                    }
                )
                self._plan()
                return
        raise SessionError(f"no pending prompt with id {prompt_id}")

    @property
    def prompts_issued(self) -> int:
        """Number of choices the user actually made.

        Prompts planned but settled transitively by later answers are
        never issued, so they do not count.
        """
        return len(self.history)

    # -- rewriting --------------------------------------------------------

    def step(self) -> None:
        """One repair round: learn, intersect, adopt, re-analyze."""
        if self.verdict != IN_PROGRESS:
            raise SessionError(f"session is finished ({self.verdict})")
        if self._pending:
            raise SessionError("round-incomplete")
        if self.round >= self.max_rounds:
            self.verdict = STALLED
            self.notes.append(f"round cap of {self.max_rounds} reached")
            return
        before = self.fingerprint()
        g = self.current
        try:
            t0 = time.perf_counter()
            groups = partition_classes(g, self.classes)
            order_map = build_order_map(
                self.facts, groups, base_orders(g), self.classes
            )
            o_a, o_p = learn_orders(self.rejected, order_map, g)
            conflicting = frozenset(n for cc in self.classes for n in cc.key)
            a_r = build_restriction_ta(o_a, o_p, g, conflicting)
            t1 = time.perf_counter()
            a_g = cfg_to_ta(g)
            t2 = time.perf_counter()
            result = intersect(a_g, a_r, self.intersect_mode)
            t3 = time.perf_counter()
            self.current = ta_to_cfg(result, g.token_labels)
            t4 = time.perf_counter()
        except LearningError as exc:
            self.verdict = NON_ADDRESSABLE
            self.notes.append(f"cannot compile recorded facts: {exc}")
            return
        except (AutomatonError, GrammarError) as exc:
            self.verdict = NON_ADDRESSABLE
            self.notes.append(f"repair produced a degenerate grammar: {exc}")
            return
        self.timings["learning"] += (t1 - t0) * 1000
        self.timings["conversion"] += ((t2 - t1) + (t4 - t3)) * 1000
        self.timings["intersection"] += (t3 - t2) * 1000
        self.round += 1
        self.learning_log.append(
            {
                "round": self.round,
                "associativity": sorted([s.name, i] for s, i in o_a),
                "precedence": sorted([s.name, i] for s, i in o_p),
                "restriction_states": len(a_r.states),
                "restriction_transitions": len(a_r.transitions),
            }
        )
        self._analyze()
        if self.verdict == IN_PROGRESS and self.fingerprint() == before:
            self.verdict = STALLED
            self.notes.append(
                "repair round left the conflict picture unchanged"
            )

    # -- reporting --------------------------------------------------------

    def report(self) -> RepairReport:
        return RepairReport(
            rounds=self.round,
            prompts_issued=self.prompts_issued,
            verdict=self.verdict,
            timings_ms=dict(self.timings),
            residual_conflicts=len(self.conflicts),
            notes=list(self.notes),
        )


def run_scripted(
    grammar: Grammar,
    answers: list[int],
    intersect_mode: str = "default",
) -> tuple[RepairSession, RepairReport]:
    """Run a whole session from a fixed answer script.

    Answers feed pending prompts in order.  Raises SessionError when the
    script is too short or has answers left over.
    """
    session = RepairSession(grammar, intersect_mode=intersect_mode)
    i = 0
    while session.verdict == IN_PROGRESS:
        nxt = session.next_prompt()
        if nxt is not None:
            if i >= len(answers):
                raise SessionError(
                    f"answer script exhausted after {i} answers; "
                    f"prompt {nxt.id} still pending"
                )
            session.answer(nxt.id, answers[i])
            i += 1
        else:
            session.step()
    if i < len(answers):
        raise SessionError(
            f"answer script has {len(answers) - i} unused answers"
        )
    return session, session.report()
