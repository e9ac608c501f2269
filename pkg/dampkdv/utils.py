import contextlib
import json
import os
import tempfile


def validate_keys(kwargs, allowed, section):
    """Raises ValueError when a config section carries unknown keys."""
    unknown = set(kwargs).difference(allowed)
    if unknown:
        raise ValueError(
            f"{','.join(sorted(unknown))} cannot be used in '{section}'"
            f" (allowed: {','.join(sorted(allowed))})"
        )


def parse_bands(bands):
    """Converts a comma-separated cutoff string to a list of ints.

    Parameters
    ----------
    bands : str
        Example: '64,128,256'. An empty string gives an empty list.

    Returns
    -------
    cutoffs : list
        Strictly increasing list of positive int cutoffs.

    """
    cutoffs = []
    for token in bands.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            cutoffs.append(int(token))
        except ValueError:
            raise ValueError(f"Band cutoff '{token}' is not an integer") from None
    validate_cutoffs(cutoffs)
    return cutoffs


def validate_cutoffs(cutoffs, n_points=None):
    if any(n <= 0 for n in cutoffs):
        raise ValueError(f"Band cutoffs must be positive, got {cutoffs}")
    if any(b <= a for a, b in zip(cutoffs, cutoffs[1:])):
        raise ValueError(f"Band cutoffs must be strictly increasing, got {cutoffs}")
    if n_points is not None and cutoffs and cutoffs[-1] >= n_points // 2:
        raise ValueError(
            f"Band cutoffs must be below N/2 = {n_points // 2}, got {cutoffs[-1]}"
        )


@contextlib.contextmanager
def atomic_write(path, mode="w"):
    """Writes to a temporary sibling of path and moves it into place
    only when the block completes, so no partial file is left behind.
    """
    dirname = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(
        dir=dirname, prefix=".tmp-", suffix=os.path.basename(path)
    )
    try:
        with os.fdopen(fd, mode, newline="" if "b" not in mode else None) as f:
            yield f
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.remove(tmp)
        raise


def write_json(data, path):
    """Writes data as indented JSON through atomic_write."""
    with atomic_write(path) as f:
        json.dump(data, f, indent=2)
        f.write("\n")


def write_csv(df, path, **kwargs):
    """Writes a DataFrame through atomic_write with 17 significant
    digits, no index and LF line endings.

    For kwargs, check :meth:`pandas.DataFrame.to_csv`.
    """
    kw = {"index": False, "float_format": "%.17g", "lineterminator": "\n"}
    kw.update(kwargs)
    with atomic_write(path) as f:
        df.to_csv(f, **kw)
