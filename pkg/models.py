"""
Shared enumerations for the quantum reservoir simulator.

Protocol kinds, benchmark task kinds and sweepable parameters are used by
every package, so they live at the top level.
"""

from enum import Enum


class ProtocolKind(str, Enum):
    """Input/measurement protocol driving the reservoir."""
    FRP = "FRP"  # fully restarting (single forward ensemble pass)
    MRP = "MRP"  # memory-restricted, last r inputs re-injected each step
    WMP = "WMP"  # weak measurement, coherence damping after each cycle
    DSP = "DSP"  # dissipative Lindblad dynamics with coherent drive


class TaskKind(str, Enum):
    """One-step benchmark tasks."""
    LXX = "LXX"  # Lorenz x_n -> x_{n+1}
    LXZ = "LXZ"  # Lorenz x_n -> z_n
    MG = "MG"    # Mackey-Glass x_n -> x_{n+1}


class SweepParameter(str, Enum):
    """Parameters a sweep can vary."""
    RESET_LENGTH = "reset_length"
    MEASUREMENT_STRENGTH = "measurement_strength"
    FIELD_STRENGTH = "field_strength"
    DECAY_RATE = "decay_rate"

    @property
    def protocol(self) -> ProtocolKind:
        """Protocol a sweep over this parameter must use."""
        return {
            SweepParameter.RESET_LENGTH: ProtocolKind.MRP,
            SweepParameter.MEASUREMENT_STRENGTH: ProtocolKind.WMP,
            SweepParameter.FIELD_STRENGTH: ProtocolKind.FRP,
            SweepParameter.DECAY_RATE: ProtocolKind.DSP,
        }[self]
