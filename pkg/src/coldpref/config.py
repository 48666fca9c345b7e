"""Flat `key = value` run configuration with environment overrides.

Lines are `key = value`; `#` starts a comment; blank lines are ignored.
Any key can be overridden by an environment variable named
COLDPREF_<KEY-IN-UPPERCASE>. Validation is exhaustive: every problem is
collected and reported at once.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .experiment import POLICIES, ScenarioConfig
from .oracle import MODES, TRANSFORMS, OracleConfig

ENV_PREFIX = "COLDPREF_"


class ConfigError(ValueError):
    """Carries the full list of validation problems."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid configuration:\n" + "\n".join(f"- {p}" for p in problems))


@dataclass
class RunConfig:
    dataset_id: str
    scenario: ScenarioConfig
    data_csv: str | None
    synthetic_n: int
    synthetic_p: int
    synthetic_noise_std: float
    results_csv: str | None
    limit_csv: str | None


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, default); None default means optional.
_SCHEMA: dict[str, tuple] = {
    "dataset_id": (str, "synthetic"),
    "data_csv": (str, None),
    "synthetic_n": (int, 2000),
    "synthetic_p": (int, 10),
    "synthetic_noise_std": (float, 0.1),
    "policies": (str, ",".join(POLICIES)),
    "start": (int, 50),
    "step": (int, 50),
    "max_queries": (int, 800),
    "n_runs": (int, 40),
    "n_test": (int, 20_000),
    "test_disjoint": (_parse_bool, False),
    "reuse_warmup": (_parse_bool, False),
    "warmup_scale": (float, 2.0),
    "warmup_residual_penalty": (float, 1e-5),
    "warmup_epsilon": (float, 1e-6),
    "oracle_mode": (str, "exponential"),
    "oracle_transform": (str, "min_max_shift"),
    "oracle_delta": (float, 0.01),
    "oracle_scale": (float, None),
    "learning_rate": (float, 0.1),
    "l2_lambda": (float, 1.0),
    "rounds_warmup": (int, 500),
    "rounds_increment": (int, 25),
    "max_depth": (int, None),
    "candidate_pool_factor": (int, 20),
    "limit_batch": (int, 1000),
    "limit_iterations": (int, 100),
    "master_seed": (int, 0),
    "results_csv": (str, None),
    "limit_csv": (str, None),
}


def parse_config_text(text: str) -> tuple[dict[str, str], list[str]]:
    """Split config text into raw key/value strings plus syntax problems."""
    values: dict[str, str] = {}
    problems: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = line.split("=", 1)
        key = key.strip()
        if key in values:
            problems.append(f"line {lineno}: duplicate key {key!r}")
            continue
        values[key] = value.strip()
    return values, problems


def load_run_config(
    path: str, env: dict[str, str] | None = None, overrides: dict[str, str] | None = None
) -> RunConfig:
    """Load, override, coerce, and validate one run configuration.

    Raises ConfigError with every problem listed.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([f"cannot read config file: {exc}"]) from exc

    raw, problems = parse_config_text(text)
    for key in sorted(raw):
        if key not in _SCHEMA:
            problems.append(f"unknown config key {key!r}")

    env = os.environ if env is None else env
    for key in _SCHEMA:
        env_name = ENV_PREFIX + key.upper()
        if env_name in env:
            raw[key] = env[env_name]
    for key, value in (overrides or {}).items():
        raw[key] = value

    parsed: dict[str, object] = {}
    for key, (parser, default) in _SCHEMA.items():
        if key in raw:
            try:
                parsed[key] = parser(raw[key])
            except ValueError as exc:
                problems.append(f"bad value for {key!r}: {exc}")
                parsed[key] = default
        else:
            parsed[key] = default

    policies = tuple(
        p.strip() for p in str(parsed["policies"]).split(",") if p.strip()
    )

    if parsed["oracle_mode"] not in MODES:
        problems.append(
            f"unknown oracle mode {parsed['oracle_mode']!r}; valid: {', '.join(MODES)}"
        )
    if parsed["oracle_transform"] not in TRANSFORMS:
        problems.append(
            f"unknown oracle transform {parsed['oracle_transform']!r}; "
            f"valid: {', '.join(TRANSFORMS)}"
        )
    if parsed["oracle_delta"] <= 0:
        problems.append(f"oracle_delta must be positive (got {parsed['oracle_delta']})")
    if parsed["oracle_scale"] is not None and parsed["oracle_scale"] <= 0:
        problems.append(f"oracle_scale must be positive (got {parsed['oracle_scale']})")
    if parsed["data_csv"] is None:
        if parsed["synthetic_n"] < 10:
            problems.append(f"synthetic_n must be at least 10 (got {parsed['synthetic_n']})")
        if parsed["synthetic_p"] < 2:
            problems.append(f"synthetic_p must be at least 2 (got {parsed['synthetic_p']})")
        if parsed["synthetic_noise_std"] < 0:
            problems.append(
                f"synthetic_noise_std must be nonnegative (got {parsed['synthetic_noise_std']})"
            )

    try:
        oracle = OracleConfig(
            mode=str(parsed["oracle_mode"]),
            transform=str(parsed["oracle_transform"]),
            shift_delta=float(parsed["oracle_delta"]),
            score_scale=parsed["oracle_scale"],
        )
    except ValueError:
        oracle = OracleConfig()  # already reported above

    scenario_kwargs = dict(
        start=parsed["start"],
        step=parsed["step"],
        max_queries=parsed["max_queries"],
        n_runs=parsed["n_runs"],
        n_test=parsed["n_test"],
        policies=policies,
        warmup_scale=parsed["warmup_scale"],
        warmup_residual_penalty=parsed["warmup_residual_penalty"],
        warmup_epsilon=parsed["warmup_epsilon"],
        oracle=oracle,
        learning_rate=parsed["learning_rate"],
        l2_lambda=parsed["l2_lambda"],
        rounds_warmup=parsed["rounds_warmup"],
        rounds_increment=parsed["rounds_increment"],
        max_depth=parsed["max_depth"],
        candidate_pool_factor=parsed["candidate_pool_factor"],
        limit_batch=parsed["limit_batch"],
        limit_iterations=parsed["limit_iterations"],
        test_disjoint=parsed["test_disjoint"],
        reuse_warmup=parsed["reuse_warmup"],
        master_seed=parsed["master_seed"],
    )
    scenario = ScenarioConfig(**scenario_kwargs)
    problems.extend(scenario.validate())

    if problems:
        raise ConfigError(problems)
    return RunConfig(
        dataset_id=str(parsed["dataset_id"]),
        scenario=scenario,
        data_csv=parsed["data_csv"],
        synthetic_n=int(parsed["synthetic_n"]),
        synthetic_p=int(parsed["synthetic_p"]),
        synthetic_noise_std=float(parsed["synthetic_noise_std"]),
        results_csv=parsed["results_csv"],
        limit_csv=parsed["limit_csv"],
    )
