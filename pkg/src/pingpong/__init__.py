"""Simulator and security analysis for the ping-pong entanglement protocol."""
from .adversary import AttackKind, AttackSpec
from .analysis import Priors, SecurityPoint
from .protocol import Mode, ProtocolConfig, SessionTranscript, run_session

__all__ = [
    "AttackKind",
    "AttackSpec",
    "Mode",
    "Priors",
    "ProtocolConfig",
    "SecurityPoint",
    "SessionTranscript",
    "run_session",
]
__version__ = "0.1.0"
