"""Synthetic revision logs with known ground truth.

Every student draws from an independent child of ``SeedSequence(seed)``, so a
cohort generated in parallel equals one generated serially.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, time, timedelta
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .features import SemesterCalendar
from .revlog import Kind, RevisionEvent, RevisionLog, serialize_revision_log
from .srl import N_ITEMS, SrlLevel, SrlResponse


class WeeklyPattern(str, Enum):
    UNIMODAL_SUNDAY = "UnimodalSunday"
    BIMODAL_WED_SAT = "BimodalWedSat"
    UNIFORM = "Uniform"


# Relative daily volume by weekday (Mon..Sun), mean 1.
PATTERN_WEIGHTS = {
    WeeklyPattern.UNIMODAL_SUNDAY: np.array([0.7, 0.8, 0.9, 0.5, 0.8, 1.0, 2.3]),
    WeeklyPattern.BIMODAL_WED_SAT: np.array([0.7, 1.0, 1.9, 0.4, 0.8, 1.7, 0.5]),
    WeeklyPattern.UNIFORM: np.ones(7),
}

_FILLER = ("reflecting on this week's reading and discussion helped me connect the ideas "
           "with my own practice and plan what to explore next. ") * 64
_DAY_START = 8 * 3600
_DAY_END = 23 * 3600


@dataclass(frozen=True)
class SimProfile:
    weekly_pattern: WeeklyPattern = WeeklyPattern.UNIFORM
    mu: float = 5.5  # log-normal parameters of characters per active day
    sigma: float = 0.6
    inactive_prob: float = 0.5
    srl_level: SrlLevel = SrlLevel.HIGH
    post_intervention_multiplier: float = 1.0
    response_delay_days: int = 0
    # deterministic schedule: active exactly on these weekdays (Mon = 0), ignoring inactive_prob
    active_weekdays: tuple[int, ...] | None = None

    def __post_init__(self):
        if not 0.0 <= self.inactive_prob <= 1.0:
            raise ValueError("inactive_prob must be in [0, 1]")
        if not (np.isfinite(self.mu) and np.isfinite(self.sigma)) or self.sigma < 0:
            raise ValueError("log-normal parameters must be finite, sigma >= 0")
        if self.post_intervention_multiplier < 0:
            raise ValueError("multiplier must be non-negative")
        if self.response_delay_days < 0:
            raise ValueError("response delay must be non-negative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["weekly_pattern"] = self.weekly_pattern.value
        d["srl_level"] = self.srl_level.value
        d["active_weekdays"] = list(self.active_weekdays) if self.active_weekdays is not None else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimProfile":
        d = dict(d)
        d["weekly_pattern"] = WeeklyPattern(d.get("weekly_pattern", "Uniform"))
        d["srl_level"] = SrlLevel(d.get("srl_level", "HighSRL"))
        if d.get("active_weekdays") is not None:
            d["active_weekdays"] = tuple(d["active_weekdays"])
        return cls(**d)


@dataclass
class SimulatedCohort:
    name: str
    calendar: SemesterCalendar
    logs: list[RevisionLog]
    ground_truth: dict
    questionnaires: list[SrlResponse] = field(default_factory=list)
    scores: dict[str, float] = field(default_factory=dict)

    @property
    def student_ids(self) -> list[str]:
        return [log.student_id for log in self.logs]


def _daily_volumes(profile: SimProfile, cal: SemesterCalendar, rng: np.random.Generator) -> np.ndarray:
    n = cal.n_days
    weekdays = np.arange(n) % 7  # start_monday is a Monday
    if profile.active_weekdays is not None:
        active = np.isin(weekdays, profile.active_weekdays)
    else:
        active = rng.random(n) >= profile.inactive_prob
    raw = rng.lognormal(profile.mu, profile.sigma, n) * PATTERN_WEIGHTS[profile.weekly_pattern][weekdays]
    onset = 7 * (cal.intervention_week - 1) + profile.response_delay_days
    raw[onset:] *= profile.post_intervention_multiplier
    volumes = np.where(active, np.maximum(1, np.rint(raw)), 0).astype(np.int64)
    return volumes


def _student_log(student_id: str, volumes: np.ndarray, cal: SemesterCalendar, rng: np.random.Generator,
                 deletion_fraction: float) -> tuple[RevisionLog, np.ndarray, np.ndarray]:
    tz = cal.tz
    events: list[RevisionEvent] = []
    inserted = np.zeros(len(volumes), dtype=np.int64)
    revisions = np.zeros(len(volumes), dtype=np.int64)
    doc_len = 0
    rev = 0
    for day in np.flatnonzero(volumes):
        v = int(volumes[day])
        k = int(min(v, 1 + rng.poisson(2)))
        parts = rng.multinomial(v - k, np.full(k, 1.0 / k)) + 1
        seconds = np.sort(rng.integers(_DAY_START, _DAY_END, k))
        deletes = rng.random(k) < deletion_fraction
        revisions[day] = k
        midnight = datetime.combine(cal.date_of(int(day)), time(0), tzinfo=tz)
        for part, sec, is_del in zip(parts.tolist(), seconds.tolist(), deletes.tolist()):
            rev += 1
            ts = midnight + timedelta(seconds=sec)
            if is_del and doc_len >= part:
                start = int(rng.integers(0, doc_len - part + 1))
                events.append(RevisionEvent(Kind.DELETION, start, start + part, "", rev, student_id, ts))
                doc_len -= part
            else:
                start = int(rng.integers(0, doc_len + 1))
                events.append(RevisionEvent(Kind.INSERTION, start, start + part, _payload(part), rev, student_id, ts))
                doc_len += part
                inserted[day] += part
    return RevisionLog(f"doc-{student_id}", student_id, tuple(events)), inserted, revisions


def _payload(n: int) -> str:
    if n <= len(_FILLER):
        return _FILLER[:n]
    return (_FILLER * (n // len(_FILLER) + 1))[:n]


def generate_cohort(
    profiles: Sequence[tuple[int, SimProfile]],
    calendar: SemesterCalendar,
    seed: int,
    *,
    name: str = "cohort",
    id_prefix: str = "s",
    deletion_fraction: float = 0.15,
) -> SimulatedCohort:
    """Generate revision logs for ``count`` students of each profile.

    The ground-truth record keeps each student's profile and realized per-day
    edited characters (insertions plus deletions), inserted characters and
    revision counts.
    """
    total = sum(c for c, _ in profiles)
    if total < 1:
        raise ValueError("cohort needs at least one student")
    if not 0.0 <= deletion_fraction <= 1.0:
        raise ValueError("deletion_fraction must be in [0, 1]")
    children = np.random.SeedSequence(seed).spawn(total)
    logs = []
    truth = {"seed": seed, "name": name, "deletion_fraction": deletion_fraction,
             "calendar": calendar.to_dict(), "students": {}}
    i = 0
    for count, profile in profiles:
        for _ in range(count):
            sid = f"{id_prefix}{i:03d}"
            rng = np.random.default_rng(children[i])
            volumes = _daily_volumes(profile, calendar, rng)
            log, inserted, revisions = _student_log(sid, volumes, calendar, rng, deletion_fraction)
            logs.append(log)
            truth["students"][sid] = {
                "profile": profile.to_dict(),
                "chars_per_day": volumes.tolist(),
                "inserted_per_day": inserted.tolist(),
                "revisions_per_day": revisions.tolist(),
            }
            i += 1
    return SimulatedCohort(name, calendar, logs, truth)


def generate_questionnaires(cohort: SimulatedCohort, seed: int) -> list[SrlResponse]:
    """Likert 1-5 answers whose level follows each student's profile SRL level."""
    rng = np.random.default_rng([seed, 1])
    out = []
    for sid in cohort.student_ids:
        level = cohort.ground_truth["students"][sid]["profile"]["srl_level"]
        base = 4.1 if level == SrlLevel.HIGH.value else 2.9
        latent = base + rng.normal(0, 0.25)
        items = np.clip(np.rint(latent + rng.normal(0, 0.55, N_ITEMS)), 1, 5).astype(int)
        out.append(SrlResponse(sid, tuple(int(v) for v in items)))
    cohort.questionnaires = out
    return out


def generate_scores(cohort: SimulatedCohort, seed: int, correlation: float = 0.45) -> dict[str, float]:
    """Reflective grades with a planted correlation to realized active-week counts."""
    rng = np.random.default_rng([seed, 2])
    weeks = cohort.calendar.weeks
    taw = np.array([
        np.count_nonzero(np.asarray(cohort.ground_truth["students"][sid]["revisions_per_day"]).reshape(weeks, 7).sum(axis=1))
        for sid in cohort.student_ids
    ], dtype=float)
    sd = taw.std()
    z = (taw - taw.mean()) / sd if sd > 0 else np.zeros_like(taw)
    noise = rng.normal(0, 1, len(taw))
    raw = correlation * z + np.sqrt(max(0.0, 1 - correlation ** 2)) * noise
    scores = np.clip(70 + 10 * raw, 0, 100)
    cohort.scores = {sid: round(float(s), 2) for sid, s in zip(cohort.student_ids, scores)}
    return cohort.scores


def write_cohort(cohort: SimulatedCohort, directory: Path) -> None:
    """Write ``logs/<id>.csv``, ``ground_truth.json`` and, when present, ``srl.csv`` and ``scores.csv``."""
    directory = Path(directory)
    (directory / "logs").mkdir(parents=True, exist_ok=True)
    for log in cohort.logs:
        (directory / "logs" / f"{log.student_id}.csv").write_text(serialize_revision_log(log), encoding="utf-8")
    (directory / "ground_truth.json").write_text(json.dumps(cohort.ground_truth, indent=1, sort_keys=True) + "\n")
    if cohort.questionnaires:
        lines = ["student_id," + ",".join(f"q{i}" for i in range(1, N_ITEMS + 1))]
        lines += [r.student_id + "," + ",".join(map(str, r.item_scores)) for r in cohort.questionnaires]
        (directory / "srl.csv").write_text("\n".join(lines) + "\n")
    if cohort.scores:
        lines = ["student_id,score"] + [f"{sid},{s}" for sid, s in cohort.scores.items()]
        (directory / "scores.csv").write_text("\n".join(lines) + "\n")


# Default two-cohort design: prior-year control and feedback-receiving intervention.
def default_profiles(intervention: bool, n: int = 40, multiplier: float | None = None) -> list[tuple[int, SimProfile]]:
    n_high = round(n * 0.62)
    if intervention:
        pattern = WeeklyPattern.BIMODAL_WED_SAT
        mult = 1.3 if multiplier is None else multiplier
    else:
        pattern = WeeklyPattern.UNIMODAL_SUNDAY
        mult = 1.0 if multiplier is None else multiplier
    high = SimProfile(pattern, inactive_prob=0.45, srl_level=SrlLevel.HIGH, post_intervention_multiplier=mult)
    low = SimProfile(pattern, inactive_prob=0.6, srl_level=SrlLevel.LOW, post_intervention_multiplier=mult)
    return [(n_high, high), (n - n_high, low)]


def simulate_study(out_dir: Path, seed: int, calendar: SemesterCalendar, n_per_cohort: int = 40,
                   intervention_multiplier: float = 1.3, deletion_fraction: float = 0.15) -> dict[str, SimulatedCohort]:
    """Generate a control and an intervention cohort and write them as a study directory."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cohorts = {}
    for k, (name, is_int) in enumerate((("control", False), ("intervention", True))):
        sub_seed = seed * 2 + k
        profiles = default_profiles(is_int, n_per_cohort, intervention_multiplier if is_int else None)
        c = generate_cohort(profiles, calendar, sub_seed, name=name, id_prefix="i" if is_int else "c",
                            deletion_fraction=deletion_fraction)
        generate_questionnaires(c, sub_seed)
        generate_scores(c, sub_seed)
        write_cohort(c, out_dir / name)
        cohorts[name] = c
    (out_dir / "calendar.json").write_text(json.dumps(calendar.to_dict(), indent=1, sort_keys=True) + "\n")
    return cohorts
