"""Constants for the otfs_array simulator."""

DOMAIN = "otfs_array"

SPEED_OF_LIGHT = 299792458.0  # m/s

# Configuration keys
CONF_M = "M"
CONF_N = "N"
CONF_DELTA_F = "delta_f"
CONF_CARRIER = "f_c"
CONF_ANTENNAS = "antennas"
CONF_SPACING = "antenna_spacing"
CONF_CP_LEN = "cp_len"
CONF_PROFILE = "profile"
CONF_PROFILE_DELAYS = "profile_delays_ns"
CONF_PROFILE_POWERS = "profile_powers_db"
CONF_PATHS_PER_TAP = "paths_per_tap"
CONF_VELOCITIES = "velocities_kmh"
CONF_SNR = "snr_db"
CONF_SNR_P = "snr_p_db"
CONF_MSE_SNR_P = "mse_snr_p_db"
CONF_MSE_DATA_SNR = "mse_data_snr_db"
CONF_SNR_REFERENCE = "snr_reference"
CONF_PATTERN = "pattern"
CONF_MODULATION = "modulation"
CONF_TRIALS = "trials"
CONF_SEED = "seed"
CONF_MODE = "mode"
CONF_ANGLES = "angles"
CONF_CSI = "csi"
CONF_L_MAX = "l_max"
CONF_K_MAX = "k_max"
CONF_PILOT_L0 = "pilot_l0"
CONF_PILOT_K0 = "pilot_k0"
CONF_AOA_POLICY = "aoa_policy"
CONF_AOA_MIN_SEPARATION = "aoa_min_separation"
CONF_GRID_SIZE = "grid_size"
CONF_THRESHOLD_RATIO = "threshold_ratio"
CONF_MERGE_WIDTH_FACTOR = "merge_width_factor"
CONF_ORACLE_CHECKS = "oracle_checks"
CONF_WORKERS = "workers"
CONF_ARRAYGAIN_DU = "arraygain_du"
CONF_SCALING_N = "scaling_n"
CONF_SCALING_BRANCHES = "scaling_branches"
CONF_SCALING_REPEATS = "scaling_repeats"

# Choices
PATTERN_FULL_GUARD = "full_guard"
PATTERN_NAIVE = "naive"
PATTERN_PROPOSED = "proposed"
PATTERNS = (PATTERN_FULL_GUARD, PATTERN_NAIVE, PATTERN_PROPOSED)

MODE_IDEAL = "ideal"
MODE_TIME = "time"
MODES = (MODE_IDEAL, MODE_TIME)

ANGLES_GENIE = "genie"
ANGLES_SCAN = "scan"
ANGLE_MODES = (ANGLES_GENIE, ANGLES_SCAN)

CSI_ESTIMATED = "estimated"
CSI_PERFECT = "perfect"
CSI_MODES = (CSI_ESTIMATED, CSI_PERFECT)

SNR_REF_BRANCH = "branch"
SNR_REF_ANTENNA = "antenna"
SNR_REFERENCES = (SNR_REF_BRANCH, SNR_REF_ANTENNA)

AOA_RESAMPLE = "resample"
AOA_KEEP = "keep"
AOA_POLICIES = (AOA_RESAMPLE, AOA_KEEP)

EQUALIZER_ZF = "ZF"
EQUALIZER_MMSE = "MMSE"

MODULATION_ORDERS = (4, 16)

# Default values (desk scale)
DEFAULT_M = 64
DEFAULT_N = 32
DEFAULT_DELTA_F = 15e3
DEFAULT_CARRIER = 4e9
DEFAULT_ANTENNAS = (128,)
DEFAULT_SPACING = 0.45  # wavelengths
DEFAULT_PROFILE = "P4"
DEFAULT_VELOCITIES = (30.0, 120.0, 500.0)
DEFAULT_SNR = (0.0, 5.0, 10.0, 15.0, 20.0)
DEFAULT_SNR_P = 40.0
DEFAULT_MSE_SNR_P = (20.0, 25.0, 30.0, 35.0, 40.0, 45.0)
DEFAULT_MSE_DATA_SNR = 20.0
DEFAULT_PATTERN = PATTERN_PROPOSED
DEFAULT_MODULATION = 4
DEFAULT_TRIALS = 200
DEFAULT_SEED = 1
DEFAULT_THRESHOLD_RATIO = 0.5
DEFAULT_MERGE_WIDTH_FACTOR = 1.0
DEFAULT_GRID_FACTOR = 4  # grid points per antenna
DEFAULT_WORKERS = 1
DEFAULT_ARRAYGAIN_DU = (0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0)
DEFAULT_SCALING_N = (128, 256, 512, 1024)
DEFAULT_SCALING_BRANCHES = (4, 8, 16)
DEFAULT_SCALING_REPEATS = 7

# Table I scale, selected with --full
FULL_M = 512
FULL_N = 128
FULL_ANTENNAS = (32, 64, 128, 256)

# Receiver and oracle limits
NOISELESS_REFERENCE_VARIANCE = 0.01
MAX_AOA_RESAMPLES = 1000
DD_MATRIX_CAP = 4096
THRESHOLD_2D_SIGMAS = 3.0
# echoes weaker than this fraction of the pilot amplitude are not paths
THRESHOLD_2D_PILOT_FLOOR = 0.01
CONFIDENCE_LEVEL = 0.95

# Delay/power profiles: (delays in ns, powers in dB)
DELAY_PROFILES = {
    "P4": ((0.0, 370.0, 1090.0, 2510.0), (0.0, -0.6, -7.0, -16.9)),
    "P6": (
        (0.0, 150.0, 370.0, 1090.0, 1730.0, 2510.0),
        (0.0, -1.4, -3.6, -7.0, -12.0, -16.9),
    ),
}
PROFILE_CUSTOM = "custom"

# Paths per tap of the generalized six-tap channel (16 paths)
Q_GENERALIZED = (2, 3, 4, 3, 2, 2)

# Experiments
EXPERIMENT_BER = "ber"
EXPERIMENT_MSE = "mse"
EXPERIMENT_OVERHEAD = "overhead"
EXPERIMENT_ARRAYGAIN = "arraygain"
EXPERIMENT_SCALING = "scaling"

# Metrics
METRIC_BER = "BER"
METRIC_SER = "SER"
METRIC_MSE = "MSE"
METRIC_RUNTIME = "runtime_s"
METRIC_OVERHEAD = "overhead_count"
METRIC_OVERHEAD_PERCENT = "overhead_percent"
METRIC_DATA_COUNT = "data_count"
METRIC_ARRAY_GAIN = "array_gain"
METRIC_ARRAY_GAIN_DIRECT = "array_gain_direct"
METRIC_ARRAY_GAIN_BOUND = "array_gain_bound"
METRIC_SCALING_SLOPE = "scaling_slope"
BOUNDED_METRICS = (METRIC_BER, METRIC_SER)

# Output
CSV_COLUMNS = (
    "experiment",
    "metric",
    "snr_db",
    "snr_p_db",
    "velocity_kmh",
    "antennas",
    "pattern",
    "value",
    "ci_half_width",
    "trials",
    "seed",
    "label",
)
SIGNIFICANT_DIGITS = 12
FLOAT_FORMAT = "%.12g"
OUTPUT_FORMATS = ("csv", "json", "both")

# Pattern grid roles
ROLE_PILOT = "P"
ROLE_GUARD = "G"
ROLE_DATA = "D"
