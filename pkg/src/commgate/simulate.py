"""Monte-Carlo simulator of the exploration game under gated sharing.

The simulator is the independent oracle for every closed-form expression in
the analytic modules, so it implements the game mechanics directly and
nothing else: agents hold their best-known reward, explore a fresh option
whenever it sits below their slot threshold, and pool states at the end of
each slot where sharing is allowed (myopic agents share at every open slot;
forward-looking agents only at the last open slot before the horizon).

Options form an unbounded stream of i.i.d. draws from the prior, so option
identities never collide.  Replications are vectorized in fixed-size chunks,
each chunk fed by its own child stream of the master seed; results are
bit-identical however many chunks run, and the draws of replication ``r``
do not depend on the total replication count.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

from .distributions import RewardDistribution
from .errors import ConfigError
from .nonmyopic import ThresholdSequence
from .schedules import CommSchedule

__all__ = ["AgentState", "SimConfig", "SimResult", "SimState", "run", "step", "trajectory_compare"]

_CHUNK = 4096
_MODES = ("deterministic", "stochastic", "heterogeneous")


@dataclass(frozen=True)
class AgentState:
    """Read-only view of one agent in one replication."""

    best_reward: float
    best_option: int | None
    explored_count: int


@dataclass(frozen=True)
class SimConfig:
    """Complete description of one simulation experiment."""

    dist: RewardDistribution
    n_agents: int
    horizon: int
    schedule: CommSchedule
    agent_kind: str = "myopic"
    thresholds: ThresholdSequence | None = None
    reward_mode: str = "deterministic"
    noise_sd: float = 0.1
    pref_sd: float = 0.1
    replications: int = 1
    master_seed: int = 0
    noise_per_option: bool = False  # draw observation noise once per option, not per look

    def __post_init__(self):
        if self.n_agents < 1:
            raise ConfigError(f"n_agents must be >= 1, got {self.n_agents}")
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if self.schedule.horizon_T != self.horizon:
            raise ConfigError(
                f"schedule horizon {self.schedule.horizon_T} != config horizon {self.horizon}"
            )
        if self.agent_kind not in ("myopic", "nonmyopic"):
            raise ConfigError(f"agent_kind must be myopic or nonmyopic, got {self.agent_kind!r}")
        if self.agent_kind == "nonmyopic":
            if self.thresholds is None:
                raise ConfigError("nonmyopic agents need a solved ThresholdSequence")
            if self.thresholds.horizon_T != self.horizon:
                raise ConfigError("thresholds horizon does not match config horizon")
        if self.reward_mode not in _MODES:
            raise ConfigError(f"reward_mode must be one of {_MODES}, got {self.reward_mode!r}")
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if self.noise_sd < 0 or self.pref_sd < 0:
            raise ConfigError("noise_sd and pref_sd must be nonnegative")

    def describe(self) -> str:
        """Canonical one-line JSON echo of the resolved configuration."""
        return json.dumps(
            {
                "dist": repr(self.dist),
                "n_agents": self.n_agents,
                "horizon": self.horizon,
                "schedule": json.loads(self.schedule.to_json()),
                "agent_kind": self.agent_kind,
                "reward_mode": self.reward_mode,
                "noise_sd": self.noise_sd,
                "pref_sd": self.pref_sd,
                "replications": self.replications,
                "master_seed": self.master_seed,
                "noise_per_option": self.noise_per_option,
            },
            sort_keys=True,
        )


@dataclass
class SimState:
    """Vectorized state of a batch of replications (arrays shaped (R, N)).

    ``m`` is each agent's best-known (believed) reward, ``best_base`` the true
    base reward of the option behind it, ``best_value`` what the agent
    actually receives when exploiting it, and ``best_opt`` the option id
    (slot * N + creator, -1 while unset).
    """

    m: np.ndarray
    best_base: np.ndarray
    best_value: np.ndarray
    best_opt: np.ndarray
    explored: np.ndarray

    @classmethod
    def initial(cls, replications: int, n_agents: int) -> "SimState":
        shape = (replications, n_agents)
        return cls(
            m=np.zeros(shape),
            best_base=np.zeros(shape),
            best_value=np.zeros(shape),
            best_opt=np.full(shape, -1, dtype=np.int64),
            explored=np.zeros(shape, dtype=np.int64),
        )

    def copy(self) -> "SimState":
        return SimState(
            self.m.copy(), self.best_base.copy(), self.best_value.copy(),
            self.best_opt.copy(), self.explored.copy(),
        )

    def agent(self, rep: int, i: int) -> AgentState:
        opt = int(self.best_opt[rep, i])
        return AgentState(float(self.m[rep, i]), None if opt < 0 else opt, int(self.explored[rep, i]))


@dataclass(frozen=True)
class SimResult:
    """Aggregated outcome of a simulation run."""

    per_slot_mean_reward: np.ndarray
    per_slot_stderr: np.ndarray
    total_welfare_mean: float
    total_welfare_stderr: float
    exploration_slots_mean: float
    exploration_slots_stderr: float
    config_echo: str = ""

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# {self.config_echo}\n")
            fh.write("t,mean_reward_per_agent,stderr\n")
            for t, (mr, se) in enumerate(zip(self.per_slot_mean_reward, self.per_slot_stderr)):
                fh.write(f"{t},{mr:.12g},{se:.12g}\n")


def _threshold_for(config: SimConfig, t: int) -> float:
    if t == 0:
        return 1.0  # nothing known yet: always explore
    if config.agent_kind == "myopic":
        return config.dist.mean()
    return config.thresholds.threshold_at(t)


def _share_slots(config: SimConfig) -> set[int]:
    open_slots = [t for t in range(config.horizon + 1) if not config.schedule.blocked(t)]
    if config.agent_kind == "myopic":
        return set(open_slots)
    # forward-looking agents withhold until the last open slot that can
    # still influence anyone's remaining choices
    useful = [t for t in open_slots if t <= config.horizon - 1]
    return {useful[-1]} if useful else set()


def _advance(state: SimState, t: int, config: SimConfig, share_now: bool,
             opt_u, noise_u, pref_explore_u, share_etas) -> np.ndarray:
    """One slot for every replication in the batch; returns received rewards."""
    R, N = state.m.shape
    d = config.dist
    mode = config.reward_mode
    thr = _threshold_for(config, t)

    explore = state.m < thr
    base = d.ppf(opt_u)
    if mode == "deterministic":
        obs = base
        receipt = np.where(explore, obs, state.m)
    elif mode == "stochastic":
        eps = config.noise_sd * special.ndtri(noise_u)
        if config.noise_per_option:
            # one fixed perturbation per option: exploit re-observes the same value
            obs = np.clip(base + eps, 0.0, 1.0)
            receipt = np.where(explore, obs, state.best_value)
        else:
            obs = np.clip(base + eps, 0.0, 1.0)
            receipt = np.where(explore, obs, np.clip(state.best_base + eps, 0.0, 1.0))
    else:  # heterogeneous: an agent's value of an option is base + her own offset
        eta = config.pref_sd * special.ndtri(pref_explore_u)
        obs = np.clip(base + eta, 0.0, 1.0)
        receipt = np.where(explore, obs, state.best_value)

    improved = explore & (obs > state.m)
    ids = t * N + np.broadcast_to(np.arange(N, dtype=np.int64), (R, N))
    state.m = np.where(improved, obs, state.m)
    state.best_base = np.where(improved, base, state.best_base)
    state.best_value = np.where(improved, obs, state.best_value)
    state.best_opt = np.where(improved, ids, state.best_opt)
    state.explored += explore

    if share_now and N > 1:
        rows = np.arange(R)
        if mode == "heterogeneous":
            # sharing reveals the options themselves; every recipient appraises
            # each shared option with her own preference offset and keeps her
            # personal best, so pooling creates a variety gain
            personal = np.clip(
                state.best_base[:, None, :] + config.pref_sd * share_etas, 0.0, 1.0
            )
            np.einsum("rnn->rn", personal)[:] = -1.0  # own option: value already known
            cand_val = personal.max(axis=2)
            cand_j = personal.argmax(axis=2)
            adopt = cand_val > state.m
            take = lambda arr: np.take_along_axis(arr, cand_j, axis=1)
            state.m = np.where(adopt, cand_val, state.m)
            state.best_value = np.where(adopt, cand_val, state.best_value)
            state.best_base = np.where(adopt, take(state.best_base), state.best_base)
            state.best_opt = np.where(adopt, take(state.best_opt), state.best_opt)
        else:
            winner = np.argmax(state.m, axis=1)
            pool = state.m[rows, winner][:, None]
            pool_base = state.best_base[rows, winner][:, None]
            pool_opt = state.best_opt[rows, winner][:, None]
            adopt = state.m < pool
            state.best_value = np.where(adopt, pool, state.best_value)
            state.m = np.where(adopt, pool, state.m)
            state.best_base = np.where(adopt, pool_base, state.best_base)
            state.best_opt = np.where(adopt, pool_opt, state.best_opt)
    return receipt


def step(state: SimState, t: int, config: SimConfig, rng: np.random.Generator) -> SimState:
    """Advance a copy of ``state`` through slot ``t``, drawing from ``rng``.

    Draw order per slot is fixed: option quantiles first, then (mode
    permitting) observation noise, preference offsets, and the shared-option
    appraisal matrix.  ``run`` uses the same mechanics but pre-draws the
    option stream in replication-major blocks.
    """
    out = state.copy()
    R, N = out.m.shape
    share_now = t in _share_slots(config)
    opt_u = rng.random((R, N))
    noise_u = rng.random((R, N)) if config.reward_mode == "stochastic" else None
    pe = rng.random((R, N)) if config.reward_mode == "heterogeneous" else None
    etas = (
        rng.standard_normal((R, N, N))
        if config.reward_mode == "heterogeneous" and share_now and N > 1
        else None
    )
    _advance(out, t, config, share_now, opt_u, noise_u, pe, etas)
    return out


def run(config: SimConfig) -> SimResult:
    """Execute all replications and aggregate welfare and exploration counts.

    Replications are processed in fixed chunks of 4096.  Chunk ``c`` owns two
    child streams of ``SeedSequence(master_seed)``: one holding the option
    quantiles in replication-major blocks (so runs that differ only in
    schedule or reward mode share their option draws, and the first ``R``
    replications of a longer run match a shorter one exactly) and one for
    observation noise and preference offsets.  Results are bit-identical
    regardless of how chunks are scheduled.
    """
    R, N, T = config.replications, config.n_agents, config.horizon
    share_at = _share_slots(config)
    mode = config.reward_mode

    n_chunks = (R + _CHUNK - 1) // _CHUNK
    seeds = np.random.SeedSequence(config.master_seed).spawn(n_chunks)

    slot_sum = np.zeros(T + 1)
    slot_sq = np.zeros(T + 1)
    totals = []
    explored_all = []
    for c in range(n_chunks):
        rc = min(_CHUNK, R - c * _CHUNK)
        opt_ss, aux_ss = seeds[c].spawn(2)
        gen = np.random.Generator(np.random.Philox(opt_ss))
        gen_aux = np.random.Generator(np.random.Philox(aux_ss))
        draws = gen.random((rc, T + 1, N))
        state = SimState.initial(rc, N)
        rep_total = np.zeros(rc)
        for t in range(T + 1):
            share_now = t in share_at
            noise_u = gen_aux.random((rc, N)) if mode == "stochastic" else None
            pe = gen_aux.random((rc, N)) if mode == "heterogeneous" else None
            etas = (
                gen_aux.standard_normal((rc, N, N))
                if mode == "heterogeneous" and share_now and N > 1
                else None
            )
            receipt = _advance(state, t, config, share_now, draws[:, t, :], noise_u, pe, etas)
            rep_mean = receipt.mean(axis=1)
            slot_sum[t] += rep_mean.sum()
            slot_sq[t] += (rep_mean**2).sum()
            rep_total += receipt.sum(axis=1)
        totals.append(rep_total)
        explored_all.append(state.explored.mean(axis=1))

    totals = np.concatenate(totals)
    explored = np.concatenate(explored_all)
    slot_mean = slot_sum / R
    slot_var = np.maximum(slot_sq / R - slot_mean**2, 0.0)
    slot_se = np.sqrt(slot_var / max(R - 1, 1))
    return SimResult(
        per_slot_mean_reward=slot_mean,
        per_slot_stderr=slot_se,
        total_welfare_mean=float(totals.mean()),
        total_welfare_stderr=float(totals.std(ddof=1) / np.sqrt(R)) if R > 1 else 0.0,
        exploration_slots_mean=float(explored.mean()),
        exploration_slots_stderr=float(explored.std(ddof=1) / np.sqrt(R)) if R > 1 else 0.0,
        config_echo=config.describe(),
    )


def trajectory_compare(config_a: SimConfig, config_b: SimConfig) -> tuple[SimResult, SimResult]:
    """Run two configurations on common random numbers and pair the series.

    Both runs consume ``config_a.master_seed`` so the option-draw streams are
    shared; the configs must agree on agent count, horizon, and reward mode.
    """
    if (config_a.n_agents, config_a.horizon) != (config_b.n_agents, config_b.horizon):
        raise ConfigError("trajectory_compare needs matching (n_agents, horizon)")
    if config_a.reward_mode != config_b.reward_mode:
        raise ConfigError("trajectory_compare needs matching reward_mode")
    paired_b = replace(config_b, master_seed=config_a.master_seed)
    return run(config_a), run(paired_b)
