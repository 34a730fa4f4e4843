"""Kinodynamic motion planning and trajectory optimization toolkit.

Pipeline: obstacle point cloud -> free-space polygon -> time-indexed
Voronoi reference paths -> time-dependent hybrid-state A* maneuver ->
direct-transcription optimal control -> closed-loop MPC simulation.
"""

__version__ = "0.1.0"
