import numpy as np


def derive_seed(seed: int, *keys: int) -> int:
    """Child seed that depends only on ``seed`` and the integer ``keys``.

    Used so that folds, splits and tuning runs do not depend on the order
    in which they are executed.
    """
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0])
