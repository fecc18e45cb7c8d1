"""Time-dependent scalar signals, piecewise-constant test functions and
field profiles.

Signals are evaluated pointwise; `side=+1` takes the right-continuous
value at a breakpoint, `side=-1` the limit from the left.  The integrator
needs the left limit for the last stage of a step that ends exactly on a
breakpoint.
"""

from __future__ import annotations

import abc
import math

import numpy as np


class TimeSignal(abc.ABC):
    """Complex-valued, locally bounded function of time."""

    @abc.abstractmethod
    def value(self, t: float, side: int = 1) -> complex:
        ...

    @abc.abstractmethod
    def shifted(self, s: float) -> "TimeSignal":
        """Signal t -> self(t + s)."""

    def breakpoints(self) -> tuple[float, ...]:
        """Times where the signal is non-smooth."""
        return ()


class Constant(TimeSignal):
    def __init__(self, value: complex = 0.0):
        self._value = complex(value)

    def value(self, t, side=1):
        return self._value

    def shifted(self, s):
        return self

    def __repr__(self):
        return f"Constant({self._value})"


ZERO = Constant(0.0)


class Harmonic(TimeSignal):
    """amplitude * exp(i * (phase + frequency * t))."""

    def __init__(self, amplitude: complex, phase: float = 0.0,
                 frequency: float = 0.0):
        self.amplitude = complex(amplitude)
        self.phase = float(phase)
        self.frequency = float(frequency)

    def value(self, t, side=1):
        return self.amplitude * np.exp(1j * (self.phase + self.frequency * t))

    def shifted(self, s):
        return Harmonic(self.amplitude, self.phase + self.frequency * s,
                        self.frequency)

    def __repr__(self):
        return f"Harmonic({self.amplitude}, {self.phase}, {self.frequency})"


class Windowed(TimeSignal):
    """Inner signal on [start, stop), zero elsewhere."""

    def __init__(self, inner: TimeSignal, start: float = 0.0,
                 stop: float = math.inf):
        self.inner = inner
        self.start = float(start)
        self.stop = float(stop)

    def value(self, t, side=1):
        if side > 0:
            inside = self.start <= t < self.stop
        else:
            inside = self.start < t <= self.stop
        return self.inner.value(t, side) if inside else 0.0j

    def shifted(self, s):
        return Windowed(self.inner.shifted(s), self.start - s, self.stop - s)

    def breakpoints(self):
        pts = [self.start]
        if math.isfinite(self.stop):
            pts.append(self.stop)
        return tuple(pts) + self.inner.breakpoints()


class PiecewiseConstant(TimeSignal):
    """Tabulated signal: values[l] on [breaks[l], breaks[l+1]), zero outside."""

    def __init__(self, breaks, values):
        self.breaks = np.asarray(breaks, dtype=float)
        self.values = np.asarray(values, dtype=complex)
        if self.breaks.ndim != 1 or len(self.breaks) != len(self.values) + 1:
            raise ValueError("need len(breaks) == len(values) + 1")
        if np.any(np.diff(self.breaks) <= 0):
            raise ValueError("breakpoints must be strictly increasing")

    def value(self, t, side=1):
        sd = "right" if side > 0 else "left"
        idx = int(np.searchsorted(self.breaks, t, side=sd)) - 1
        if 0 <= idx < len(self.values):
            return complex(self.values[idx])
        return 0.0j

    def shifted(self, s):
        return PiecewiseConstant(self.breaks - s, self.values)

    def breakpoints(self):
        return tuple(self.breaks)


class TestFunction:
    """Piecewise-constant R^m-valued test function, zero outside its span.

    breakpoints: strictly increasing, values[l] applies on
    (breakpoints[l], breakpoints[l+1]).
    """

    def __init__(self, breakpoints, values):
        self.breaks = np.asarray(breakpoints, dtype=float)
        self.values = np.atleast_2d(np.asarray(values, dtype=float))
        if self.values.size == 0:
            self.values = self.values.reshape(0, self.values.shape[-1])
        if self.breaks.ndim != 1 or len(self.breaks) != self.values.shape[0] + 1:
            raise ValueError("need len(breakpoints) == n_intervals + 1")
        if np.any(np.diff(self.breaks) <= 0):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def zero(cls, m: int) -> "TestFunction":
        return cls([0.0], np.zeros((0, m)))

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def end(self) -> float:
        return float(self.breaks[-1])

    @property
    def is_zero(self) -> bool:
        return self.values.size == 0 or not np.any(self.values)

    def value(self, t: float, side: int = 1) -> np.ndarray:
        sd = "right" if side > 0 else "left"
        idx = int(np.searchsorted(self.breaks, t, side=sd)) - 1
        if 0 <= idx < self.values.shape[0]:
            return self.values[idx].copy()
        return np.zeros(self.m)

    def shifted(self, s: float) -> "TestFunction":
        return TestFunction(self.breaks - s, self.values)

    def breakpoints(self) -> tuple[float, ...]:
        return tuple(self.breaks)

    def scale(self, factor: float) -> "TestFunction":
        return TestFunction(self.breaks, self.values * factor)

    def __neg__(self):
        return self.scale(-1.0)

    def _combine(self, other: "TestFunction", sign: float) -> "TestFunction":
        if other.m != self.m:
            raise ValueError("test functions have different m")
        breaks = np.union1d(self.breaks, other.breaks)
        mids = 0.5 * (breaks[:-1] + breaks[1:])
        vals = np.array([self.value(t) + sign * other.value(t) for t in mids])
        if vals.size == 0:
            vals = vals.reshape(0, self.m)
        return TestFunction(breaks, vals)

    def __add__(self, other):
        return self._combine(other, +1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)


class FieldProfile:
    """Coherent-field component functions f_i(t), zero outside [0, window)."""

    def __init__(self, signals, window: float = math.inf):
        self.signals = tuple(signals)
        self.window = float(window)

    @classmethod
    def zero(cls, d: int) -> "FieldProfile":
        return cls((ZERO,) * d, 0.0)

    @property
    def d(self) -> int:
        return len(self.signals)

    @property
    def is_zero(self) -> bool:
        if self.window <= 0:
            return True
        return all(isinstance(s, Constant) and s.value(0.0) == 0
                   for s in self.signals)

    def value(self, t: float, side: int = 1) -> np.ndarray:
        if side > 0:
            inside = 0.0 <= t < self.window
        else:
            inside = 0.0 < t <= self.window
        if not inside:
            return np.zeros(self.d, dtype=complex)
        return np.array([s.value(t, side) for s in self.signals], dtype=complex)

    def shifted(self, s: float) -> "FieldProfile":
        return FieldProfile(tuple(sig.shifted(s) for sig in self.signals),
                            self.window - s)

    def breakpoints(self) -> tuple[float, ...]:
        pts = [0.0]
        if math.isfinite(self.window):
            pts.append(self.window)
        for sig in self.signals:
            pts.extend(sig.breakpoints())
        return tuple(pts)
