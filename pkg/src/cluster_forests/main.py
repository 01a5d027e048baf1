#
# main.py -- command line front end for cluster forests: dataset runs, benchmark
# tables, synthetic simulations, feature profiles and perturbation sweeps.
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

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np
import pandas as pd

import micro_logging as logging
from baselines import (METHOD_BC2, METHOD_EA, METHOD_RP, BaselineConfig, UnknownMethodError, run_baseline,
                       search_ea_threshold, search_rp_dimension)
from base_cluster import kappa_bruteforce
from data import PRESETS, bayes_accuracy, feature_profile, load_csv, sample_gaussian_mixture, standardize, \
    write_profile_csv
from ensemble import CFConfig, export_affinity_binary, export_affinity_csv, run_cluster_forests
from growth import STOP_ATTEMPT_ALL, GrowthConfig, feature_occurrence
from metrics import rho_c, rho_r
from perturbation_lab import sweep
from utils import ClusterForestsError, default_threads, draw_seed, make_rng, milliseconds, safe_float, safe_int, \
    write_table

CONFIG_FILE = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data', 'config.json')
METHOD_CF = 'cf'
ALL_METHODS = (METHOD_CF, METHOD_EA, METHOD_RP, METHOD_BC2)

DEFAULT_CONFIG = {
    'seed': 0,
    'T': 100,
    'b': 2,
    'q': 1,
    'tau_max': 3,
    'beta1': 10.0,
    'beta2': 0.4,
    'n_b': None,
    'reps': 1,
    'standardize': True,
    'spectral': 'ncut',
    'regularize': 'zero',
    'distinct': False,
    'ea_threshold': 0.5,
    'rp_dim': 5,
    'nu': 0.05,
    'trials': 200,
    'degrees': 'observed',
    'vectors': 100,
    'n': 2000,
}

# feature competition size per synthetic preset
PRESET_Q = {'g1': 1, 'g2': 20, 'g3': 50}


def read_config(path=CONFIG_FILE):
    config = dict(DEFAULT_CONFIG)
    try:
        with open(path, 'r') as config_file:
            loaded = json.load(config_file)
        if not isinstance(loaded, dict):
            raise ValueError('configuration is not a JSON object')
        config.update(loaded)
    except Exception as ex:
        logging.error(f'failed to load configuration! {type(ex)} {ex}', 'main:read_config')
    return config


def save_config(config, path=CONFIG_FILE):
    with open(path, 'w') as config_file:
        json.dump(config, config_file, indent=2, sort_keys=True)


def merged_config(args, config):
    """config file values with every command line flag that was given laid over them."""
    merged = dict(DEFAULT_CONFIG)
    merged.update(config)
    for name in DEFAULT_CONFIG:
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    return merged


class Settings:
    """flag value if given, else config file value, else the built-in default."""

    def __init__(self, args, config):
        self.args = args
        self.config = config
        self.used = {}

    def _raw(self, name):
        value = getattr(self.args, name, None)
        if value is None:
            value = self.config.get(name, DEFAULT_CONFIG.get(name))
        return value

    def get_int(self, name):
        raw = self._raw(name)
        value = None if raw is None else safe_int(raw, None)
        if raw is not None and value is None:
            raise ClusterForestsError(f'setting {name}={raw!r} is not an integer')
        self.used[name] = value
        return value

    def get_float(self, name):
        raw = self._raw(name)
        value = safe_float(raw)
        if np.isnan(value):
            raise ClusterForestsError(f'setting {name}={raw!r} is not a number')
        self.used[name] = value
        return value

    def get_bool(self, name):
        raw = self._raw(name)
        value = raw.strip().lower() in ('1', 'true', 'yes', 'on') if isinstance(raw, str) else bool(raw)
        self.used[name] = value
        return value

    def get_str(self, name):
        value = str(self._raw(name))
        self.used[name] = value
        return value


def _float_list(text):
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError as exc:
        raise ClusterForestsError(f'bad number list {text!r}') from exc


def _int_list(text):
    values = [safe_int(v, None) for v in text.split(',') if v.strip()]
    if any(v is None for v in values):
        raise ClusterForestsError(f'bad integer list {text!r}')
    return values


def _rep_seed(master, rep):
    return draw_seed(make_rng(master, rep))


def _metadata(command, settings: Settings, seed, **extra):
    metadata = {'version': __version__, 'command': command, 'seed': seed,
                'config': {k: v for k, v in settings.used.items() if k != 'seed'}}
    metadata.update(extra)
    return metadata


def _load(args, settings: Settings):
    data, truth = load_csv(args.input, label_column=args.labels_col, header=args.header)
    if settings.get_bool('standardize'):
        data = standardize(data)
    return data, truth


def _final_clusters(args, truth):
    if args.k is not None:
        return args.k
    if truth is None:
        raise ClusterForestsError('--k is required when there is no label column')
    return truth.num_classes


def _cf_config(settings: Settings, n_f, seed, threads, q=None):
    growth = GrowthConfig(b=settings.get_int('b'), q=settings.get_int('q') if q is None else q,
                          tau_max=settings.get_int('tau_max'), distinct=settings.get_bool('distinct'))
    return CFConfig(T=settings.get_int('T'), growth=growth, beta1=settings.get_float('beta1'),
                    beta2=settings.get_float('beta2'), n_b=settings.get_int('n_b'), n_f=n_f, seed=seed,
                    regularize=settings.get_str('regularize'), spectral_method=settings.get_str('spectral'),
                    threads=threads)


def cmd_run(args, settings: Settings, threads):
    data, truth = _load(args, settings)
    n_f = _final_clusters(args, truth)
    seed = settings.get_int('seed')
    reps = settings.get_int('reps')
    if reps < 1:
        raise ClusterForestsError(f'reps must be >= 1, got {reps}')
    cfg = _cf_config(settings, n_f, seed, threads)
    os.makedirs(args.out, exist_ok=True)

    labels_frame = pd.DataFrame({'point': np.arange(data.n)})
    scores = []
    affinity = diagnostics = None
    for rep in range(reps):
        labels, affinity, diagnostics = run_cluster_forests(data, replace(cfg, seed=_rep_seed(seed, rep)))
        if args.check:
            _check_kappas(data, diagnostics)
        labels_frame[f'rep_{rep}'] = labels.labels
        if truth is not None:
            scores.append((rep, rho_r(labels, truth), 100.0 * rho_c(labels, truth)))
    metadata = _metadata('run', settings, seed, input=os.path.basename(args.input), k=n_f,
                         labels_col=args.labels_col)
    write_table(os.path.join(args.out, 'labels.csv'), labels_frame, metadata)
    if scores:
        per_rep = pd.DataFrame(scores, columns=['rep', 'rho_r', 'rho_c'])
        write_table(os.path.join(args.out, 'scores.csv'), per_rep, metadata)
        summary = pd.DataFrame({'metric': ['rho_r', 'rho_c'],
                                'mean': [per_rep.rho_r.mean(), per_rep.rho_c.mean()],
                                'std': [per_rep.rho_r.std(ddof=0), per_rep.rho_c.std(ddof=0)]})
        write_table(os.path.join(args.out, 'summary.csv'), summary, metadata)
    vectors = pd.DataFrame({'vector': np.arange(len(diagnostics.vectors)),
                            'kappa': diagnostics.kappas,
                            'features': [' '.join(str(f) for f in v) for v in diagnostics.features]})
    write_table(os.path.join(args.out, 'vectors.csv'), vectors, metadata)
    export_affinity_csv(os.path.join(args.out, 'affinity.csv'), affinity, metadata)
    export_affinity_binary(os.path.join(args.out, 'affinity.bin'), affinity)


def _check_kappas(data, diagnostics):
    """recompute every member kappa by pair enumeration."""
    bad = 0
    for index, vector in enumerate(diagnostics.vectors):
        if vector.partition is None:
            continue
        reference = kappa_bruteforce(vector.view(data), vector.partition)
        if not np.isclose(vector.kappa_value, reference, rtol=1e-9, atol=0.0):
            bad += 1
            logging.warning(f'member {index} kappa {vector.kappa_value!r} != pairwise {reference!r}',
                            'main:_check_kappas')
    logging.info(f'checked {len(diagnostics.vectors)} kappas, {bad} mismatched', 'main:_check_kappas')
    if bad:
        raise ClusterForestsError(f'{bad} kappa values disagree with pair enumeration')


class _Scorer:
    """mean rho_r / rho_c of one method configuration over the repetitions."""

    def __init__(self, data, truth, reps, seed):
        self.data = data
        self.truth = truth
        self.reps = reps
        self.seed = seed
        self.cache = {}

    def scores(self, cfg):
        if cfg not in self.cache:
            r, c = [], []
            for rep in range(self.reps):
                rep_cfg = replace(cfg, seed=_rep_seed(self.seed, rep))
                if isinstance(cfg, CFConfig):
                    labels = run_cluster_forests(self.data, rep_cfg)[0]
                else:
                    labels = run_baseline(self.data, rep_cfg)
                r.append(rho_r(labels, self.truth))
                c.append(100.0 * rho_c(labels, self.truth))
            self.cache[cfg] = (float(np.mean(r)), float(np.std(r)), float(np.mean(c)), float(np.std(c)))
        return self.cache[cfg]

    def select(self, metric):
        index = 0 if metric == 'rho_r' else 2
        return lambda cfg: self.scores(cfg)[index]


def cmd_bench(args, settings: Settings, threads):
    data, truth = _load(args, settings)
    if truth is None:
        raise ClusterForestsError('bench needs --labels-col')
    n_f = _final_clusters(args, truth)
    seed = settings.get_int('seed')
    T = settings.get_int('T')
    methods = [m.strip().lower() for m in args.methods.split(',') if m.strip()]
    for method in methods:
        if method not in ALL_METHODS:
            raise UnknownMethodError(f'unknown method {method!r}, expected one of {",".join(ALL_METHODS)}')
    scorer = _Scorer(data, truth, settings.get_int('reps'), seed)
    rows = []
    for method in methods:
        if method == METHOD_CF:
            q_values = _int_list(args.q_grid) if args.q_grid else [settings.get_int('q')]
            for q in q_values:
                cfg = _cf_config(settings, n_f, seed, threads, q=q)
                rows.append((method, f'q={q}', *scorer.scores(cfg)))
            continue
        cfg = BaselineConfig(method, T=T, n_f=n_f, t=settings.get_float('ea_threshold'),
                             dim=min(settings.get_int('rp_dim'), data.p), seed=seed, threads=threads)
        if args.search and method == METHOD_EA:
            cfg, _, _ = search_ea_threshold(cfg, scorer.select(args.select))
        elif args.search and method == METHOD_RP:
            cfg, _, _ = search_rp_dimension(cfg, data.p, scorer.select(args.select))
        param = {METHOD_EA: f't={cfg.t}', METHOD_RP: f'dim={cfg.dim}', METHOD_BC2: ''}[method]
        rows.append((method, param, *scorer.scores(cfg)))
        logging.info(f'{method} {param} done', 'main:cmd_bench')
    table = pd.DataFrame(rows, columns=['method', 'param', 'rho_r_mean', 'rho_r_std', 'rho_c_mean', 'rho_c_std'])
    metadata = _metadata('bench', settings, seed, input=os.path.basename(args.input), k=n_f,
                         labels_col=args.labels_col, methods=','.join(methods), search=bool(args.search))
    write_table(args.out, table, metadata)


def cmd_synth(args, settings: Settings, threads):
    seed = settings.get_int('seed')
    n = settings.get_int('n')
    spec = PRESETS[args.preset](seed)
    data, truth = sample_gaussian_mixture(spec, n, make_rng(seed, 1))
    q = args.q if args.q is not None else PRESET_Q[args.preset]
    settings.used['q'] = q
    if args.preset == 'g1':
        growth = GrowthConfig(b=1, q=q, stopping=STOP_ATTEMPT_ALL)
    else:
        growth = GrowthConfig(b=settings.get_int('b'), q=q, tau_max=settings.get_int('tau_max'))
    cfg = CFConfig(T=settings.get_int('vectors'), growth=growth, beta1=settings.get_float('beta1'),
                   beta2=settings.get_float('beta2'), n_f=2, seed=seed, threads=threads)
    labels, _, diagnostics = run_cluster_forests(data, cfg)

    os.makedirs(args.out, exist_ok=True)
    metadata = _metadata('synth', settings, seed, preset=args.preset)
    counts = feature_occurrence(diagnostics.vectors, data.p)
    occurrence = pd.DataFrame(counts, columns=[f'f{j}' for j in range(data.p)])
    occurrence.insert(0, 'vector', np.arange(counts.shape[0]))
    write_table(os.path.join(args.out, 'occurrence.csv'), occurrence, metadata)

    top5 = np.argsort(-np.abs(spec.mu), kind='stable')[:5]
    covered = float(np.mean(counts[:, top5].sum(axis=1) > 0))
    summary = pd.DataFrame({'preset': [args.preset], 'n': [n], 'p': [data.p],
                            'rho_c': [rho_c(labels, truth)], 'rho_r': [rho_r(labels, truth)],
                            'bayes_accuracy': [bayes_accuracy(spec)], 'top5_coverage': [covered]})
    write_table(os.path.join(args.out, 'summary.csv'), summary, metadata)


def cmd_profile(args, settings: Settings, threads):
    data, _ = _load(args, settings)
    seed = settings.get_int('seed')
    strengths = feature_profile(data, args.k, seed)
    write_profile_csv(args.out, strengths, _metadata('profile', settings, seed, k=args.k,
                                                     input=os.path.basename(args.input)))


def cmd_perturb(args, settings: Settings, threads):
    seed = settings.get_int('seed')
    gammas = _float_list(args.gamma_grid)
    sigmas = _float_list(args.sigma_grid)
    frame = sweep(args.n1, gammas, sigmas, settings.get_float('nu'), settings.get_int('trials'), seed,
                  settings.get_str('degrees'), threads)
    write_table(args.out, frame, _metadata('perturb', settings, seed, n1=args.n1,
                                           gamma_grid=args.gamma_grid, sigma_grid=args.sigma_grid))


def _add_dataset_args(parser):
    parser.add_argument('--input', required=True, help='CSV data file')
    parser.add_argument('--labels-col', dest='labels_col', help='index or name of the true label column')
    parser.add_argument('--header', action=argparse.BooleanOptionalAction, default=None,
                        help='first row holds column names (default: guess)')
    parser.add_argument('--standardize', action=argparse.BooleanOptionalAction, default=None,
                        help='standardize numeric features (default on)')


def make_parser():
    parser = argparse.ArgumentParser(prog='cf', description='Cluster forests ensemble clustering')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--config', help='JSON configuration file')
    parser.add_argument('--save-config', dest='save_config', help='write the merged configuration to this file')
    parser.add_argument('--threads', type=int, help='worker threads (default $CF_THREADS or 1)')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='-v info, -vv debug')
    parser.add_argument('--seed', type=int, help='master seed')
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help='cluster forests on a data file')
    _add_dataset_args(run)
    run.add_argument('--k', type=int, help='final cluster count (default: label classes)')
    run.add_argument('--T', type=int, help='ensemble size')
    run.add_argument('--b', type=int, help='features sampled per growth step')
    run.add_argument('--q', type=int, help='feature competition size')
    run.add_argument('--tau-max', dest='tau_max', type=int, help='failed growth attempts allowed')
    run.add_argument('--n-b', dest='n_b', type=int, help='base cluster count (default: k)')
    run.add_argument('--beta1', type=float, help='scaling exponent')
    run.add_argument('--beta2', type=float, help='threshold level')
    run.add_argument('--reps', type=int, help='repetitions')
    run.add_argument('--spectral', choices=('ncut', 'njw'))
    run.add_argument('--regularize', choices=('zero', 'exp'))
    run.add_argument('--distinct', action='store_true', default=None, help='never add a feature twice')
    run.add_argument('--check', action='store_true', help='verify every kappa against pair enumeration')
    run.add_argument('--out', required=True, help='output directory')
    run.set_defaults(handler=cmd_run)

    bench = commands.add_parser('bench', help='compare ensemble methods on a labelled data file')
    _add_dataset_args(bench)
    bench.add_argument('--k', type=int)
    bench.add_argument('--T', type=int)
    bench.add_argument('--reps', type=int)
    bench.add_argument('--methods', default=','.join(ALL_METHODS), help='comma separated: cf,ea,rp,bc2')
    bench.add_argument('--search', action='store_true', help='search EA threshold and RP dimension')
    bench.add_argument('--select', choices=('rho_r', 'rho_c'), default='rho_c', help='search criterion')
    bench.add_argument('--q-grid', dest='q_grid', help='comma separated q values for cf')
    bench.add_argument('--out', default='-', help='output CSV (default stdout)')
    bench.set_defaults(handler=cmd_bench)

    synth = commands.add_parser('synth', help='synthetic gaussian mixture simulation')
    synth.add_argument('--preset', required=True, choices=sorted(PRESETS))
    synth.add_argument('--n', type=int, help='sample size')
    synth.add_argument('--q', type=int, help='feature competition size (default per preset)')
    synth.add_argument('--vectors', type=int, help='clustering vectors to grow')
    synth.add_argument('--out', required=True, help='output directory')
    synth.set_defaults(handler=cmd_synth)

    profile = commands.add_parser('profile', help='single feature strength profile')
    _add_dataset_args(profile)
    profile.add_argument('--k', type=int, required=True)
    profile.add_argument('--out', default='-', help='output CSV (default stdout)')
    profile.set_defaults(handler=cmd_profile)

    perturb = commands.add_parser('perturb', help='misclustering rate sweep on the planted model')
    perturb.add_argument('--n1', type=int, required=True)
    perturb.add_argument('--gamma-grid', dest='gamma_grid', default='1.0')
    perturb.add_argument('--sigma-grid', dest='sigma_grid', default='1.0')
    perturb.add_argument('--nu', type=float)
    perturb.add_argument('--trials', type=int)
    perturb.add_argument('--degrees', choices=('observed', 'planted'))
    perturb.add_argument('--out', default='-', help='output CSV (default stdout)')
    perturb.set_defaults(handler=cmd_perturb)
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    if args.verbose:
        logging.set_level(logging.INFO if args.verbose == 1 else logging.DEBUG)
    config = read_config(args.config) if args.config else dict(DEFAULT_CONFIG)
    threads = args.threads if args.threads is not None else default_threads()
    settings = Settings(args, config)
    start = milliseconds()
    try:
        if args.save_config:
            save_config(merged_config(args, config), args.save_config)
        logging.info(f'{args.command} starting', 'main:main')
        args.handler(args, settings, max(1, threads))
    except (ClusterForestsError, OSError) as ex:
        logging.error(f'{args.command} failed: {type(ex).__name__} {ex}', 'main:main')
        return 1
    logging.info(f'{args.command} finished in {milliseconds() - start} ms', 'main:main')
    return 0


if __name__ == '__main__':
    sys.exit(main())
