"""Feedback sources: seeded Gaussian arms and an external evaluator process.

External evaluators speak one JSON object per line over stdin/stdout::

    -> {"arm": 3, "trial": 17}
    <- {"feedback": 0.91}

Arm and trial numbers on the wire are 1-based.
"""

from __future__ import annotations

import json
import math
import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .errors import ArmError, ParameterError, ProtocolError
from .regret import GaussianArmSpec

PRESETS: dict[str, tuple[GaussianArmSpec, ...]] = {
    "paper7": (
        GaussianArmSpec(0.84, 0.07),
        GaussianArmSpec(0.84, 0.01),
        GaussianArmSpec(0.85, 0.04),
        GaussianArmSpec(0.85, 0.02),
        GaussianArmSpec(0.88, 0.01),
        GaussianArmSpec(0.88, 0.02),
        GaussianArmSpec(0.89, 0.01),
    ),
}


@dataclass(frozen=True)
class RngStream:
    """Names one independent random stream as ``(seed, stream_id)``.

    Each arm and the strategy get their own child generator, so the
    feedback sequence of an arm does not depend on how the others are pulled.
    """

    seed: int
    stream_id: int = 0

    def _sequence(self, *key: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *key))

    def arm_generator(self, arm: int) -> np.random.Generator:
        return np.random.default_rng(self._sequence(0, arm))

    def strategy_generator(self) -> np.random.Generator:
        return np.random.default_rng(self._sequence(1))


class Arm(Protocol):
    def sample(self, trial: int) -> float: ...


class Environment(Protocol):
    arms: Sequence[Arm]

    @property
    def arm_count(self) -> int: ...

    def close(self) -> None: ...


class GaussianArm:
    def __init__(self, spec: GaussianArmSpec, rng: np.random.Generator):
        self.spec = spec
        self._rng = rng

    def sample(self, trial: int) -> float:
        return float(self._rng.normal(self.spec.mean, self.spec.std_dev))


class SyntheticEnvironment:
    def __init__(self, specs: Sequence[GaussianArmSpec], rng: RngStream):
        if not specs:
            raise ParameterError("no arms")
        for s in specs:
            if not s.std_dev > 0.0:
                raise ParameterError(f"std_dev must be > 0, got {s.std_dev}")
        self.specs = tuple(specs)
        self.arms = [GaussianArm(s, rng.arm_generator(i)) for i, s in enumerate(self.specs)]

    @property
    def arm_count(self) -> int:
        return len(self.arms)

    def close(self) -> None:
        pass

    def __enter__(self) -> SyntheticEnvironment:
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def make_synthetic_env(
    specs: Sequence[GaussianArmSpec] | str, rng: RngStream
) -> SyntheticEnvironment:
    if isinstance(specs, str):
        try:
            specs = PRESETS[specs]
        except KeyError:
            raise ParameterError(f"unknown preset {specs!r}") from None
    return SyntheticEnvironment(specs, rng)


class _ExternalArm:
    def __init__(self, env: ExternalEnvironment, index: int):
        self._env = env
        self.index = index

    def sample(self, trial: int) -> float:
        return self._env.request(self.index, trial)


class ExternalEnvironment:
    """All ``K`` arms served by a single child process."""

    def __init__(self, command: str | Sequence[str], arm_count: int, timeout: float = 60.0):
        if arm_count < 1:
            raise ParameterError(f"arm count must be >= 1, got {arm_count}")
        self.command = command
        self.timeout = timeout
        self.exchanges = 0
        self._last_trial = 0
        self._broken = False
        self.arms = [_ExternalArm(self, i) for i in range(arm_count)]
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise ArmError(f"cannot start evaluator {argv!r}: {exc}") from exc
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    @property
    def arm_count(self) -> int:
        return len(self.arms)

    def _pump(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def request(self, arm: int, trial: int) -> float:
        if trial <= self._last_trial:
            raise ProtocolError(f"trial numbers must increase: {trial} after {self._last_trial}")
        self._last_trial = trial
        msg = json.dumps({"arm": arm + 1, "trial": trial})
        try:
            assert self._proc.stdin is not None
            self._proc.stdin.write(msg + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ArmError(f"evaluator exited (code {self._proc.poll()}) before trial {trial}") from exc
        self.exchanges += 1
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            self._broken = True
            raise ArmError(f"evaluator timed out after {self.timeout}s on trial {trial}") from None
        if line is None:
            raise ArmError(f"evaluator exited (code {self._proc.poll()}) before answering trial {trial}")
        return parse_response(line)

    def close(self) -> None:
        proc = self._proc
        if self._broken and proc.poll() is None:
            proc.kill()
        if proc.poll() is None:
            try:
                proc.stdin.close()  # type: ignore[union-attr]
            except OSError:
                pass
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()
        self._reader.join(timeout=5)
        if proc.stdout is not None:
            proc.stdout.close()

    def __enter__(self) -> ExternalEnvironment:
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def parse_response(line: str) -> float:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed response line {line.strip()!r}") from exc
    if not isinstance(obj, dict) or "feedback" not in obj:
        raise ProtocolError(f"response has no 'feedback': {line.strip()!r}")
    value = obj["feedback"]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProtocolError(f"feedback is not a number: {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ProtocolError(f"feedback is not finite: {value!r}")
    return value


def make_external_env(
    command: str | Sequence[str], arm_count: int, timeout: float = 60.0
) -> ExternalEnvironment:
    return ExternalEnvironment(command, arm_count, timeout)
