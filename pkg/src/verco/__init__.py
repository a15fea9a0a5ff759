"""Two-agent verbal-communication RL in a textual kitchen gridworld."""

__version__ = "0.1.0"
