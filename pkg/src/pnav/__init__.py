"""pnav: power-aware navigation for a simulated 2D mobile robot.

A deterministic navigation simulator plus the power-management stack it
exercises: end-to-end power prediction (motors + embedded board), navigation
locality monitoring, collision/safe-time prediction, a power-augmented dynamic
window planner, and a coordinator that picks CPU/GPU frequency levels and
navigation parameters.
"""

__version__ = "0.1.0"
