"""Grid-world multi-agent game arena.

Three parameterizable lockstep games (meadow chase, build race, dungeon
treasure hunt), a deterministic episode engine with hash-verified replays,
a TCP protocol for external agents, scripted baselines, and a round-robin
play-off tournament ranked by sum of scores.
"""

__version__ = "0.1.0"
