#
# dataset_loader.py -- convert raw UCI benchmark files into the CSV layout the
# cluster forests tools read: a header row, feature columns, label column last.
#
__author__ = 'J. B. Otterson'
__copyright__ = """
Copyright 2022, 2026 J. B. Otterson N1KDO.
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

# this tool never downloads anything; fetch the raw files from the listed URLs yourself.

import argparse
import os
import sys
from dataclasses import dataclass
from typing import Tuple

import pandas as pd

UCI_BASE = 'https://archive.ics.uci.edu/ml/machine-learning-databases/'
LABEL_NAME = 'label'


@dataclass(frozen=True)
class DatasetSource:
    name: str
    url: str
    label_column: int  # position in the raw file
    drop_columns: Tuple[int, ...] = ()
    separator: str = ','
    skip_rows: int = 0
    n: int = 0
    p: int = 0


DATASETS = {
    'soybean': DatasetSource('soybean', UCI_BASE + 'soybean/soybean-small.data', 35, n=47, p=35),
    'wine': DatasetSource('wine', UCI_BASE + 'wine/wine.data', 0, n=178, p=13),
    'wdbc': DatasetSource('wdbc', UCI_BASE + 'breast-cancer-wisconsin/wdbc.data', 1, drop_columns=(0,),
                          n=569, p=30),
    'heart': DatasetSource('heart', UCI_BASE + 'statlog/heart/heart.dat', 13, separator=r'\s+', n=270, p=13),
    'imgseg': DatasetSource('imgseg', UCI_BASE + 'image/segmentation.test', 0, skip_rows=5, n=2100, p=19),
}


class DatasetLoaderError(Exception):
    pass


def convert(source: DatasetSource, raw_path, out_path):
    """rewrite a raw file with named feature columns and the label last. returns (n, p)."""
    try:
        frame = pd.read_csv(raw_path, header=None, sep=source.separator, skiprows=source.skip_rows,
                            dtype=str, engine='python', skip_blank_lines=True)
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as exc:
        raise DatasetLoaderError(f'cannot read {raw_path}: {exc}') from exc
    if source.label_column >= frame.shape[1]:
        raise DatasetLoaderError(f'{raw_path} has {frame.shape[1]} columns, label expected at {source.label_column}')
    labels = frame.iloc[:, source.label_column].str.strip()
    keep = [c for c in range(frame.shape[1]) if c != source.label_column and c not in source.drop_columns]
    features = frame.iloc[:, keep].apply(lambda s: s.str.strip())
    features.columns = [f'x{i}' for i in range(len(keep))]
    features[LABEL_NAME] = labels.to_numpy()
    features.to_csv(out_path, index=False, lineterminator='\n')
    if source.n and (features.shape[0] != source.n or len(keep) != source.p):
        print(f'warning: {source.name} has n={features.shape[0]}, p={len(keep)}; '
              f'expected n={source.n}, p={source.p}', file=sys.stderr)
    return features.shape[0], len(keep)


def list_datasets():
    for source in DATASETS.values():
        print(f'{source.name:<8s} n={source.n:<5d} p={source.p:<3d} {source.url}')


def main():
    parser = argparse.ArgumentParser(
        prog='dataset_loader',
        description='Convert raw UCI benchmark files for cluster forests')
    parser.add_argument('--list',
                        action='store_true',
                        help='list the known datasets and where to get them')
    parser.add_argument('--dataset',
                        choices=sorted(DATASETS),
                        help='which dataset the raw file holds')
    parser.add_argument('--raw',
                        help='raw file as downloaded')
    parser.add_argument('--out',
                        help='converted CSV, default <dataset>.csv in $CF_DATA_DIR or here')
    args = parser.parse_args()
    if args.list:
        list_datasets()
        return
    if args.dataset is None or args.raw is None:
        parser.error('--dataset and --raw are required unless --list is given')
    out_path = args.out
    if out_path is None:
        out_path = os.path.join(os.environ.get('CF_DATA_DIR', '.'), f'{args.dataset}.csv')
    try:
        n, p = convert(DATASETS[args.dataset], args.raw, out_path)
    except (DatasetLoaderError, OSError) as exc:
        print(f'failed to convert {args.raw}: {exc}', file=sys.stderr)
        sys.exit(1)
    print(f'wrote {out_path}: n={n}, p={p}, label column {LABEL_NAME!r}')


if __name__ == '__main__':
    main()
