"""Tuning-phase orchestration and the search strategies.

A TuningController is driven iteration by iteration from the simulation
loop: it hands out the configuration to use (trial candidates during the
sampling window at each phase start, then the phase winner) and collects
the measured force/build times as evidence.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

from .configuration import Configuration

TRIAL = "trial"
STEADY = "steady"


class TuningError(RuntimeError):
    pass


def evidence_cost(force_ns: float, build_ns: float,
                  rebuild_interval: int) -> float:
    """Per-iteration cost estimate: force time plus the build amortized
    over the rebuild interval."""
    if rebuild_interval < 1:
        raise ValueError("rebuild interval must be >= 1")
    return float(force_ns) + float(build_ns) / rebuild_interval


def predict_cost(history, target_phase: int) -> float:
    """Extrapolate a configuration's cost to ``target_phase`` from its
    last two (phase, cost) points; one point gives a constant model.
    Clamped below at 1 ns (declining histories can extrapolate through
    zero)."""
    if not history:
        raise TuningError("cannot predict without measurements")
    if len(history) == 1:
        return max(1.0, float(history[0][1]))
    (p1, c1), (p2, c2) = history[-2], history[-1]
    slope = (c2 - c1) / (p2 - p1)
    return max(1.0, c2 + slope * (target_phase - p2))


def full_search_candidates(space):
    """Full Search trials everything."""
    return list(space)


class ConfigState:
    """Per-configuration evidence the Predictive strategy feeds on."""

    __slots__ = ("history", "phases_since_trial", "blacklisted")

    def __init__(self):
        self.history: list[tuple[int, float]] = []
        self.phases_since_trial = 0
        self.blacklisted = False

    def add_point(self, phase: int, cost: float):
        self.history.append((phase, cost))
        del self.history[:-2]


def predictive_candidates(states: dict, space, phase: int,
                          retrial_interval: int):
    """Everything in the first two phases, then configurations predicted
    within 2x of the expected best, plus any due for a retrial;
    blacklisted ones never return."""
    live = [c for c in space if not states[c.id].blacklisted]
    if not live:
        raise TuningError("all configurations are blacklisted")
    if phase < 2:
        return live
    preds = {c.id: predict_cost(states[c.id].history, phase)
             if states[c.id].history else float("inf") for c in live}
    threshold = 2.0 * min(preds.values())
    return [c for c in live
            if preds[c.id] <= threshold
            or states[c.id].phases_since_trial >= retrial_interval]


class Strategy:
    """Chooses which configurations a tuning phase should trial."""

    needs_trials = True
    uses_blacklist = False
    name = "strategy"

    def candidates(self, space, phase: int, states: dict, stats,
                   controller) -> list[Configuration]:
        raise NotImplementedError


class FullSearchStrategy(Strategy):
    name = "full-search"

    def candidates(self, space, phase, states, stats, controller):
        return full_search_candidates(space)


class PredictiveStrategy(Strategy):
    name = "predictive"
    uses_blacklist = True

    def __init__(self, retrial_interval: int | None = None):
        self.retrial_interval = retrial_interval

    def candidates(self, space, phase, states, stats, controller):
        interval = self.retrial_interval
        if interval is None:
            interval = controller.default_retrial_interval
        return predictive_candidates(states, space, phase, interval)


class FixedStrategy(Strategy):
    """Pins one configuration; phases select it without sampling."""

    needs_trials = False
    name = "fixed"

    def __init__(self, config: Configuration):
        self.config = config

    def candidates(self, space, phase, states, stats, controller):
        return [self.config]


@dataclass
class TuningLogRow:
    phase_index: int
    configuration_id: str
    sample_index: int
    force_time_nanos: int
    build_time_nanos: int
    aggregated_cost_nanos: float
    selected: bool
    blacklisted: bool


TUNING_LOG_COLUMNS = ("phaseIndex", "configurationId", "sampleIndex",
                      "forceTimeNanos", "buildTimeNanos",
                      "aggregatedCostNanos", "selected", "blacklisted")


class TuningController:
    """Iteration-driven tuning state machine.

    Call configuration_for_iteration(it) before the force step (it returns
    the configuration plus whether a rebuild must be forced), then
    record_timings(force_ns, build_ns) with the measured times. Phase
    boundaries fall on multiples of tuning_interval; each phase trials the
    strategy's candidates for samples_per_config iterations apiece and
    then runs the winner.
    """

    def __init__(self, space, strategy: Strategy, *,
                 samples_per_config: int = 3, tuning_interval: int = 1000,
                 rebuild_interval: int = 1, total_iterations: int | None = None,
                 stats_provider=None):
        if samples_per_config < 1:
            raise ValueError("samplesPerConfig must be >= 1")
        if tuning_interval < 1:
            raise ValueError("tuningInterval must be >= 1")
        self.space = list(space)
        self.strategy = strategy
        self.samples_per_config = samples_per_config
        self.tuning_interval = tuning_interval
        self.rebuild_interval = rebuild_interval
        self.stats_provider = stats_provider
        self.states = {c.id: ConfigState() for c in self.space}
        self.log: list[TuningLogRow] = []
        self.phase_selections: list[tuple[int, str]] = []
        self.stats_snapshots: list = []
        self.trial_iterations = 0
        self.current_config: Configuration | None = None
        if total_iterations:
            total_phases = max(1, total_iterations // tuning_interval)
            self.default_retrial_interval = max(1, total_phases // 4)
        else:
            self.default_retrial_interval = 10
        self._mode = STEADY
        self._last_phase_started = -1
        self._phase = -1
        self._queue: list[Configuration] = []
        self._cand_idx = 0
        self._sample_idx = 0
        self._samples: dict[str, tuple[list, list]] = {}
        self._failed: set[str] = set()
        self._rows_this_phase: list[TuningLogRow] = []

    @property
    def mode(self) -> str:
        return self._mode

    # -- iteration protocol --------------------------------------------

    def configuration_for_iteration(self, iteration: int):
        """Configuration for this iteration and whether the container
        rebuild must be forced (first sample of every trial)."""
        if (self._mode == STEADY and iteration % self.tuning_interval == 0
                and iteration // self.tuning_interval
                > self._last_phase_started):
            self._start_phase(iteration // self.tuning_interval)
        if self._mode == TRIAL:
            return self._queue[self._cand_idx], self._sample_idx == 0
        return self.current_config, False

    def record_timings(self, force_ns: int, build_ns: int):
        if self._mode != TRIAL:
            return
        cfg = self._queue[self._cand_idx]
        forces, builds = self._samples[cfg.id]
        forces.append(force_ns)
        builds.append(build_ns)
        row = TuningLogRow(self._phase, cfg.id, self._sample_idx,
                           int(force_ns), int(build_ns), 0.0, False, False)
        self.log.append(row)
        self._rows_this_phase.append(row)
        self.trial_iterations += 1
        self._sample_idx += 1
        if self._sample_idx >= self.samples_per_config:
            self._advance_candidate()

    def record_failure(self, error: BaseException | None = None) -> bool:
        """Mark the candidate under trial as failed (infinite cost).
        Returns False outside of a trial window."""
        if self._mode != TRIAL:
            return False
        cfg = self._queue[self._cand_idx]
        self._failed.add(cfg.id)
        row = TuningLogRow(self._phase, cfg.id, self._sample_idx, 0, 0,
                           float("inf"), False, False)
        self.log.append(row)
        self._rows_this_phase.append(row)
        self._advance_candidate()
        return True

    # -- phase machinery ------------------------------------------------

    def _start_phase(self, phase: int):
        self._last_phase_started = phase
        self._phase = phase
        if not self.space and not isinstance(self.strategy, FixedStrategy):
            raise TuningError("configuration space is empty")
        stats = self.stats_provider() if self.stats_provider else None
        if stats is not None:
            self.stats_snapshots.append((phase, stats))
        cands = self.strategy.candidates(self.space, phase, self.states,
                                         stats, self)
        if not cands:
            raise TuningError(f"no candidates for tuning phase {phase}")
        if not self.strategy.needs_trials and len(cands) == 1:
            self._bump_untrialled(set())
            self.current_config = cands[0]
            self.phase_selections.append((phase, cands[0].id))
            return
        budget = self.tuning_interval
        if len(cands) * self.samples_per_config > budget:
            raise TuningError(
                f"{len(cands)} candidates x {self.samples_per_config} "
                f"samples exceed the tuning interval of {budget} iterations")
        self._mode = TRIAL
        self._queue = cands
        self._cand_idx = 0
        self._sample_idx = 0
        self._samples = {c.id: ([], []) for c in cands}
        self._failed = set()
        self._rows_this_phase = []

    def _advance_candidate(self):
        self._cand_idx += 1
        self._sample_idx = 0
        if self._cand_idx >= len(self._queue):
            self._finish_phase()

    def _finish_phase(self):
        costs: dict[str, float] = {}
        for cfg in self._queue:
            if cfg.id in self._failed:
                costs[cfg.id] = float("inf")
                continue
            forces, builds = self._samples[cfg.id]
            costs[cfg.id] = evidence_cost(statistics.median(forces),
                                          max(builds),
                                          self.rebuild_interval)
        best = min(costs.values())
        if best == float("inf"):
            raise TuningError(
                f"every candidate failed in tuning phase {self._phase}")
        selected = min((c for c in self._queue if costs[c.id] == best),
                       key=self._enumeration_rank)
        newly_blacklisted = set()
        if self.strategy.uses_blacklist:
            for cfg in self._queue:
                if costs[cfg.id] > 10.0 * best:
                    self.states[cfg.id].blacklisted = True
                    newly_blacklisted.add(cfg.id)
        for row in self._rows_this_phase:
            row.aggregated_cost_nanos = costs[row.configuration_id]
            row.selected = row.configuration_id == selected.id
            row.blacklisted = row.configuration_id in newly_blacklisted
        trialled = {c.id for c in self._queue}
        for cfg in self._queue:
            state = self.states.get(cfg.id)
            if state is None:
                continue
            state.phases_since_trial = 0
            if cfg.id not in self._failed:
                state.add_point(self._phase, costs[cfg.id])
        self._bump_untrialled(trialled)
        self.current_config = selected
        self.phase_selections.append((self._phase, selected.id))
        self._mode = STEADY

    def _bump_untrialled(self, trialled: set):
        for cid, state in self.states.items():
            if cid not in trialled:
                state.phases_since_trial += 1

    def _enumeration_rank(self, config: Configuration) -> int:
        """Ties between equal costs go to the earlier enumerated
        configuration regardless of trial order."""
        for i, c in enumerate(self.space):
            if c.id == config.id:
                return i
        return len(self.space)


def run_tuning_phase(controller: TuningController, run_iteration,
                     start_iteration: int = 0) -> Configuration:
    """Drive the controller through one full tuning phase.

    ``run_iteration(config, force_rebuild) -> (force_ns, build_ns)``
    executes one live iteration. Returns the phase's selected
    configuration."""
    if start_iteration % controller.tuning_interval != 0:
        raise TuningError("tuning phases begin on multiples of the "
                          "tuning interval")
    target = len(controller.phase_selections) + 1
    it = start_iteration
    while len(controller.phase_selections) < target:
        cfg, rebuild = controller.configuration_for_iteration(it)
        if len(controller.phase_selections) >= target:
            break
        force_ns, build_ns = run_iteration(cfg, rebuild)
        controller.record_timings(force_ns, build_ns)
        it += 1
    return controller.current_config
