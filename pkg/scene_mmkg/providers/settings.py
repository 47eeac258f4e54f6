DEFAULT_DIMENSION = 256
DEFAULT_TIMEOUT_MS = 10000
DEFAULT_MAX_RETRIES = 3
REQUEST_BACKOFF_FACTOR = 0.2
REQUEST_MAX_RETRY_DELAY = 5

PROVIDER_ENV_VAR = "SCENE_MMKG_PROVIDER"

NORM_TOLERANCE = 1e-6
# similarity scores are rounded before threshold tests and ordering
SIMILARITY_DECIMALS = 12

TRIGRAM_PAD = " "
