import os
from dotenv import load_dotenv

load_dotenv()


class Config:
    # Morlet family: center frequency and support threshold
    MU = float(os.getenv("MU", "1.0"))
    TAU0 = float(os.getenv("TAU0", "0.2"))

    N_VOICES = int(os.getenv("N_VOICES", "32"))

    # Sigma search grid of the blind estimator and the entropy selectors
    SIGMA_MIN = float(os.getenv("SIGMA_MIN", "0.5"))
    SIGMA_MAX = float(os.getenv("SIGMA_MAX", "10.0"))
    SIGMA_STEP = float(os.getenv("SIGMA_STEP", "0.05"))

    RENYI_ORDER = float(os.getenv("RENYI_ORDER", "2.5"))
    RENYI_HALF_WINDOW = int(os.getenv("RENYI_HALF_WINDOW", "4"))
    PEAK_THRESHOLD = float(os.getenv("PEAK_THRESHOLD", "0.2"))
    RIDGE_SEARCH_BINS = int(os.getenv("RIDGE_SEARCH_BINS", "2"))
    SMOOTHING_TAPS = int(os.getenv("SMOOTHING_TAPS", "5"))

    # Synchrosqueezing
    GAMMA_REL = float(os.getenv("GAMMA_REL", "1e-5"))
    EPS_DENOM_REL = float(os.getenv("EPS_DENOM_REL", "1e-8"))

    # Ridge extraction and component recovery
    BAND_HALF_WIDTH = int(os.getenv("BAND_HALF_WIDTH", "2"))
    RIDGE_JUMP = int(os.getenv("RIDGE_JUMP", "3"))
    RIDGE_GAP_REL = float(os.getenv("RIDGE_GAP_REL", "1e-3"))

    # Lower cut of the reconstruction-constant integral, as a fraction of mu
    CPSI_FLOOR = float(os.getenv("CPSI_FLOOR", "0.01"))

    NOISE_SEED = int(os.getenv("NOISE_SEED", "0"))
    SNR_DB = float(os.getenv("SNR_DB", "10.0"))

    WORKERS = int(os.getenv("WORKERS", "4"))
    OUTPUT_DIR = os.getenv("OUTPUT_DIR", "output")
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
