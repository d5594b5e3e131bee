"""Interactive traversal of an inferred model to derive a proof script.

A session is a cursor into the model plus the accumulated steps. Stepping
follows outgoing transitions by label (parameters are free: the user may
type values no witness ever had), undo recomputes the cursor by replay,
and the history renders back into script text. Guard disagreements warn
but never refuse — exploring paths the classifier dislikes is part of
the workflow.

Sessions are in-memory; each one serializes its own mutations behind a
lock while the shared model stays immutable.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass

from .efsm import Efsm, Transition
from .guards import END_OF_TRACE
from .proofscript import render_events
from .traces import ParamVector, TraceEvent

DEFAULT_SESSION_TTL = 3600.0  # seconds


class GuidanceError(ValueError):
    """A step that cannot be taken; carries the labels that could."""

    def __init__(self, message: str, available: list[str] | None = None):
        super().__init__(message)
        self.available = available or []


@dataclass(frozen=True)
class Suggestion:
    label: str
    parameter_candidates: tuple[ParamVector, ...]  # by frequency, then lexicographic
    combined_hint: bool
    leads_to_accepting: bool

    @property
    def display_name(self) -> str:
        return self.label[:-2] if self.label.endswith("_0") else self.label


def _suggestion_from(transition: Transition, model: Efsm) -> Suggestion:
    return Suggestion(
        label=transition.label,
        parameter_candidates=tuple(transition.ranked_witnesses()),
        combined_hint=any(v.combined for v in transition.witnesses),
        leads_to_accepting=transition.target in model.accepting,
    )


class GuidanceSession:
    """Cursor + history over one immutable model."""

    def __init__(self, model: Efsm, session_id: str | None = None):
        if not model.is_label_deterministic():
            raise GuidanceError("session requires a determinized model")
        self.id = session_id or uuid.uuid4().hex[:12]
        self.model = model
        self._out = model.out_map()
        self.cursor = model.initial
        self.history: list[TraceEvent] = []
        self.last_warnings: list[str] = []
        self.lock = threading.Lock()

    # -- queries --------------------------------------------------------------

    def options(self) -> list[Suggestion]:
        transitions = [
            ts[0] for _, ts in sorted(self._out.get(self.cursor, {}).items())
        ]
        return [_suggestion_from(t, self.model) for t in transitions]

    @property
    def can_finish(self) -> bool:
        return self.cursor in self.model.accepting

    def available_labels(self) -> list[str]:
        return sorted(self._out.get(self.cursor, {}))

    def render_script(self) -> str:
        return render_events(self.history)

    # -- mutations ------------------------------------------------------------

    def step(self, label: str, values: ParamVector) -> "GuidanceSession":
        candidates = self._out.get(self.cursor, {}).get(label)
        if not candidates:
            raise GuidanceError(
                f"no transition labeled {label!r} from the current state",
                available=self.available_labels(),
            )
        transition = candidates[0]
        warnings: list[str] = []
        guards = self.model.guards
        if guards is not None:
            predicted = guards.predict(label, values)
            if (
                predicted is not None
                and predicted != END_OF_TRACE
                and predicted not in self._out.get(transition.target, {})
            ):
                warnings.append(
                    f"guards expect {predicted!r} after {label} with these "
                    f"parameters, which the next state does not offer"
                )
        self.cursor = transition.target
        self.history.append(TraceEvent(label, values))
        self.last_warnings = warnings
        assert self._replay() == self.cursor
        return self

    def undo(self) -> "GuidanceSession":
        if not self.history:
            raise GuidanceError("nothing to undo")
        self.history.pop()
        self.cursor = self._replay()
        self.last_warnings = []
        return self

    def _replay(self) -> int:
        state = self.model.initial
        for event in self.history:
            state = self._out[state][event.label][0].target
        return state


def open_session(model: Efsm) -> GuidanceSession:
    """Fresh session at the initial state with empty history."""
    return GuidanceSession(model)
