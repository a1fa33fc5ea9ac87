"""Counter-based SplitMix64 streams.

Every random quantity in the package is a pure function of a 64-bit key and
a counter, so permutations and trial seeds do not depend on iteration order,
process layout or the kernel backend.

    stream(key, c) = fmix64(key + GOLDEN * (c + 1))          (mod 2**64)
    derive(seed, index, domain) = stream(fmix64(seed ^ domain), index)

``fmix64`` is the SplitMix64 output function (Steele, Lea & Flood 2014,
constants from Stafford's "Mix13").
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

# domain tags keep the per-edge, per-trial and solver streams disjoint
DOMAIN_EDGE = 0x6C69667465646765  # "liftedge"
DOMAIN_TRIAL = 0x747269616C736565  # "trialsee"
DOMAIN_SOLVER = 0x6C616E637A6F7321  # "lanczos!"
DOMAIN_SEARCH = 0x6772656564792121  # "greedy!!"


def fmix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def stream(key, counter):
    return fmix64(key + GOLDEN * (counter + 1))


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, int):
        try:
            seed = int(seed)
        except (TypeError, ValueError):
            raise ValueError(f"seed must be an integer, got {seed!r}") from None
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must lie in [0, 2**64), got {seed}")
    return seed


def derive(seed, index, domain):
    """Child seed number ``index`` of ``seed`` within ``domain``."""
    return stream(fmix64(check_seed(seed) ^ domain), index)


def edge_key(seed, edge_index):
    return derive(seed, edge_index, DOMAIN_EDGE)


def trial_seed(master_seed, trial):
    return derive(master_seed, trial, DOMAIN_TRIAL)
