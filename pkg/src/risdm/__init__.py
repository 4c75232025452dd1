"""Link-level simulation of joint space-time coding on 1-bit reconfigurable surfaces.

Time coding carries QAM symbols on the first switching harmonic, space coding
steers the beam, and the two are combined per element by XOR.
"""

from .array import ArrayGeometry, Direction, SPEED_OF_LIGHT
from .coding import JointSchedule, SpaceCoding, TimeCode, joint_code, qam_demap, qam_map, space_coding, symbols_to_timecode
from .config import ExperimentConfig, load_config, parse_config
from .errors import (
    ConfigurationError,
    EqualizationError,
    FramingError,
    InfeasibleAmplitudeError,
    RisdmError,
    ScheduleParseError,
    SyncError,
    UsageError,
)
from .harmonics import SlotCode, harmonic_coefficient, numeric_harmonic_oracle, solve_slot_for_target
from .link import LinkSetup, ber_sweep, run_frame
from .patterns import beam_scan, beamforming_gain, power_pattern
from .synthesis import IqWaveform, synthesize_rx

__version__ = "0.1.0"
