#
# some helper functions shared by the cluster forests modules
#
__author__ = 'J. B. Otterson'
__copyright__ = """
Copyright 2023, 2026, J. B. Otterson N1KDO.
Redistribution and use in source and binary forms, with or without modification,
are permitted provided that the following conditions are met:
  1. Redistributions of source code must retain the above copyright notice,
     this list of conditions and the following disclaimer.
  2. Redistributions in binary form must reproduce the above copyright notice,
     this list of conditions and the following disclaimer in the documentation
     and/or other materials provided with the distribution.
THIS SOFTWARE IS PROVIDED BY THE COPYRIGHT HOLDERS AND CONTRIBUTORS "AS IS" AND
ANY EXPRESS OR IMPLIED WARRANTIES, INCLUDING, BUT NOT LIMITED TO, THE IMPLIED
WARRANTIES OF MERCHANTABILITY AND FITNESS FOR A PARTICULAR PURPOSE ARE DISCLAIMED.
IN NO EVENT SHALL THE COPYRIGHT HOLDER OR CONTRIBUTORS BE LIABLE FOR ANY DIRECT,
INDIRECT, INCIDENTAL, SPECIAL, EXEMPLARY, OR CONSEQUENTIAL DAMAGES (INCLUDING,
BUT NOT LIMITED TO, PROCUREMENT OF SUBSTITUTE GOODS OR SERVICES; LOSS OF USE,
DATA, OR PROFITS; OR BUSINESS INTERRUPTION) HOWEVER CAUSED AND ON ANY THEORY OF
LIABILITY, WHETHER IN CONTRACT, STRICT LIABILITY, OR TORT (INCLUDING NEGLIGENCE
OR OTHERWISE) ARISING IN ANY WAY OUT OF THE USE OF THIS SOFTWARE, EVEN IF ADVISED
OF THE POSSIBILITY OF SUCH DAMAGE.
"""
__version__ = '1.0.0'

import os
import sys
import time

import numpy as np

# +inf kappa sentinel: orders after every finite kappa.
KAPPA_INFINITY = float('inf')


class ClusterForestsError(Exception):
    pass


def get_timestamp(tt=None):
    if tt is None:
        tt = time.gmtime()
    return f'{tt[0]:04d}-{tt[1]:02d}-{tt[2]:02d} {tt[3]:02d}:{tt[4]:02d}:{tt[5]:02d}Z'


def milliseconds():
    return int(time.monotonic() * 1000)


def safe_int(value, default=-1):
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return int(value)
    if isinstance(value, str):
        value = value.strip()
        if value.lstrip('-').isdigit():
            return int(value)
    return default


def safe_float(value, default=float('nan')):
    if isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool):
        return float(value)
    try:
        return float(value)
    except (TypeError, ValueError):
        return default


def default_threads():
    threads = safe_int(os.environ.get('CF_THREADS', ''), 1)
    return threads if threads > 0 else 1


def make_rng(seed, *stream):
    """
    rng for (seed, stream...); a Generator passed as seed is used as-is.
    the same key always gives the same stream, whichever thread draws it.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        return np.random.default_rng()
    return np.random.default_rng((int(seed),) + tuple(int(s) for s in stream))


def draw_seed(rng):
    return int(rng.integers(0, 2 ** 63 - 1))


def relabel_first_appearance(labels):
    """map labels to 0..k-1 in order of first appearance."""
    labels = np.asarray(labels)
    _, first_index, inverse = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(first_index, kind='stable')
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return rank[inverse.reshape(-1)].astype(np.int64)


def metadata_lines(metadata):
    """'# key=value' lines in sorted key order; nested dicts flatten to key.sub."""
    lines = []
    for key in sorted(metadata or {}):
        value = metadata[key]
        if isinstance(value, dict):
            lines.extend(metadata_lines({f'{key}.{k}': v for k, v in value.items()}))
        else:
            lines.append(f'# {key}={value}')
    return lines


def write_table(path, frame, metadata=None, float_format='%.12g'):
    """write a pandas frame as CSV after the '#' metadata lines. path '-' is stdout."""
    header = '\n'.join(metadata_lines(metadata))
    body = frame.to_csv(index=False, float_format=float_format, lineterminator='\n')
    content = (header + '\n' if header else '') + body
    if path is None or path == '-':
        sys.stdout.write(content)
    else:
        with open(path, 'w', encoding='utf-8', newline='') as outfile:
            outfile.write(content)
