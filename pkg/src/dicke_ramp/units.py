"""Unit conventions and conversions.

Internally every energy/frequency is an angular frequency in rad/ms and
every time is in ms (hbar = 1).  Configuration files and published numbers
quote plain frequencies f = omega/(2 pi) in kHz, so 1 kHz maps to 2 pi
rad/ms.  Decoherence rates are quoted in 1/s and map to 1/ms.
"""

import math

TWO_PI = 2.0 * math.pi


def khz_to_angular(f_khz):
    """Plain frequency f/(2 pi) in kHz -> angular frequency in rad/ms."""
    return TWO_PI * f_khz


def angular_to_khz(omega):
    """Angular frequency in rad/ms -> plain frequency f/(2 pi) in kHz."""
    return omega / TWO_PI


def hz_to_angular(f_hz):
    """Plain frequency in Hz -> angular frequency in rad/ms."""
    return TWO_PI * f_hz * 1e-3


def angular_to_hz(omega):
    """Angular frequency in rad/ms -> plain frequency in Hz."""
    return omega / TWO_PI * 1e3


def per_second_to_per_ms(rate):
    """Decoherence rate in 1/s -> 1/ms."""
    return rate * 1e-3
