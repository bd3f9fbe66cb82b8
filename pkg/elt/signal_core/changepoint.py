
import numpy as np
import ruptures as rpt


def noise_sigma(x, scale):
    """
    Noise level of a series from the median absolute first difference,
    floored at a hundredth of the channel scale
    """
    if len(x) < 3:
        return max(0.01 * scale, 1e-12)
    d = np.diff(x)
    mad = np.median(np.abs(d - np.median(d)))
    return max(mad / (0.6745 * np.sqrt(2.0)), 0.01 * scale, 1e-12)


def binseg_breakpoints(x, scale, penalty_beta=3.0, min_size=4, jump=None):
    """
    Breakpoints of a piecewise linear fit found with binary segmentation

    Args:
        x:              1-D array of samples
        scale:          robust scale of the full channel
        penalty_beta:   penalty per breakpoint is penalty_beta * log(n)
        min_size:       shortest segment
        jump:           subsample of candidate breakpoints, n // 200 by
                        default

    Returns:
        bkps:           sorted interior breakpoint indices into x
    """

    n = len(x)
    if n < 2 * min_size or np.ptp(x) == 0:
        return []
    if jump is None:
        jump = max(1, n // 200)

    # the linear cost regresses the first column on the others
    y = (x - np.median(x)) / noise_sigma(x, scale)
    u = np.linspace(0.0, 1.0, n)
    signal = np.column_stack((y, u, np.ones(n)))

    algo = rpt.Binseg(model='linear', min_size=min_size, jump=jump).fit(signal)
    bkps = algo.predict(pen=penalty_beta * np.log(n))
    return sorted(int(b) for b in bkps if 0 < b < n)
