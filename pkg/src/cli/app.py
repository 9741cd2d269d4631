import argparse
import json
import os
import random
import sys
import tempfile
from dataclasses import dataclass
from functools import partial
from typing import Any, Callable, List, Optional, Tuple

from pydantic import BaseModel, ValidationError

from src.config.config import SemivalueConfig
from src.schema.schema import (
    CertificateModel,
    ChowModel,
    ErrorModel,
    GameModel,
    InverseResultModel,
    KhintchineModel,
    MembershipRequestModel,
    PartitionProbabilityModel,
    ProbabilityVectorModel,
    PtonRequestModel,
    ReductionTraceModel,
    RPartitionModel,
    SelftestReportModel,
    SemivalueVectorModel,
    TargetsModel,
    VectorModel,
    VerifyResultModel,
)
from src.services.game_model import ProbabilityVector, is_reasonable, preset_probability_vector
from src.services.inverse_service import InverseInstance, InverseService
from src.services.khintchine_service import KhintchineService
from src.services.metrics_service import MetricsService
from src.services.reduction_service import ReductionService
from src.services.selftest_service import SelftestService
from src.services.semivalue_service import SemivalueService
from src.utils.error_utils import ParseError, SemivalueError, UsageError
from src.utils.logging_utils import get_logger, setup_logging
from src.utils.rational_utils import parse_rational, parse_rational_list

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_NO = 1
EXIT_ERROR = 2


class CliArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting"""

    def error(self, message: str):
        raise UsageError(message, {"usage": self.format_usage().strip()})


@dataclass
class App:
    """Services wired from one configuration"""

    config: SemivalueConfig
    metrics: MetricsService
    semivalues: SemivalueService
    khintchine: KhintchineService
    reductions: ReductionService
    inverse: InverseService


def create_app(config: SemivalueConfig) -> App:
    """Create the service graph for a run"""
    metrics = MetricsService()
    semivalues = SemivalueService.from_config(config, metrics)
    khintchine = KhintchineService.from_config(config, metrics)
    reductions = ReductionService.from_config(config, semivalues, khintchine)
    inverse = InverseService.from_config(config, semivalues)
    return App(config=config, metrics=metrics, semivalues=semivalues, khintchine=khintchine,
               reductions=reductions, inverse=inverse)


# Input helpers

def load_json(path: str) -> Any:
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            return json.load(handle)
    except OSError as e:
        raise ParseError(f"Cannot read {path}: {e.strerror}", {"path": path}) from e
    except json.JSONDecodeError as e:
        raise ParseError(f"{path} is not valid JSON: {e.msg}", {"path": path, "line": e.lineno}) from e


def _validate(model: type, data: Any, path: str) -> Any:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise ParseError(f"{path} does not match {model.__name__}",
                         {"path": path, "errors": json.loads(e.json(include_url=False))}) from e


def load_game(path: str):
    return _validate(GameModel, load_json(path), path).to_game()


def load_vector(path: str, key: str = 'vector') -> Tuple:
    """A bare JSON list, or an object holding the list under ``key``"""
    data = load_json(path)
    if isinstance(data, list):
        return parse_rational_list(data)
    model = VectorModel if key == 'vector' else TargetsModel
    return tuple(getattr(_validate(model, data, path), key))


def load_targets(path: str) -> Tuple:
    return load_vector(path, key='values')


def resolve_pvec(pvec_arg: str, n: Optional[int]) -> ProbabilityVector:
    """
    Resolve a --pvec value

    Args:
        pvec_arg: 'banzhaf', 'shapley', 'banzhaf:N', 'shapley:N' or a JSON file path
        n: Player count taken from the instance when the value has no N, or None

    Returns:
        ProbabilityVector: Validated vector
    """
    name, _, count = pvec_arg.partition(':')
    if name.lower() in ('banzhaf', 'shapley') and not os.path.exists(pvec_arg):
        if count:
            try:
                n = int(count)
            except ValueError as e:
                raise UsageError(f"Bad player count in --pvec {pvec_arg!r}") from e
        if n is None:
            raise UsageError(f"--pvec {pvec_arg!r} needs a player count here, use {name}:N")
        return preset_probability_vector(name, n)
    data = load_json(pvec_arg)
    if isinstance(data, list):
        data = {"entries": data}
    return _validate(ProbabilityVectorModel, data, pvec_arg).to_pvec()


# Subcommand handlers return (document, exit code)

Result = Tuple[BaseModel, int]


def cmd_semivalues(app: App, args) -> Result:
    game = load_game(args.game)
    values = app.semivalues.semivalues(game, resolve_pvec(args.pvec, game.n), method=args.method)
    return SemivalueVectorModel(values=list(values.values)), EXIT_OK


def cmd_chow(app: App, args) -> Result:
    constant, degree_one = app.semivalues.chow_parameters(load_game(args.game))
    return ChowModel(constant=constant, degree_one=list(degree_one)), EXIT_OK


def cmd_khintchine(app: App, args) -> Result:
    vector = load_vector(args.vector)
    result = app.khintchine.khintchine(vector, resolve_pvec(args.pvec, len(vector)), method=args.method)
    return KhintchineModel(value=result.value, method=result.method), EXIT_OK


def cmd_partition_prob(app: App, args) -> Result:
    vector = load_vector(args.vector)
    prob = app.khintchine.partition_probability(vector, resolve_pvec(args.pvec, len(vector)), method=args.method)
    return PartitionProbabilityModel(probability=prob), EXIT_OK


def _trace_result(app: App, args, trace) -> Result:
    model = ReductionTraceModel.from_trace(trace, include_timing=args.timing)
    return model, EXIT_OK if trace.all_checks_pass else EXIT_NO


def cmd_reduce_rpartition(app: App, args) -> Result:
    inst = _validate(RPartitionModel, load_json(args.input), args.input).to_instance()
    return _trace_result(app, args, app.reductions.trace_rpartition(inst, resolve_pvec(args.pvec, inst.n + 2)))


def cmd_reduce_khintchine(app: App, args) -> Result:
    vector = load_vector(args.vector)
    y = None if args.y is None else parse_rational(args.y)
    return _trace_result(app, args, app.reductions.trace_khintchine(vector, resolve_pvec(args.pvec, len(vector)), y))


def cmd_reduce_optimize(app: App, args) -> Result:
    vector = load_vector(args.vector)
    p = resolve_pvec(args.pvec, len(vector))
    return _trace_result(app, args, app.reductions.trace_optimize(vector, p, mode=args.mode, bound=args.bound))


def cmd_reduce_pton(app: App, args) -> Result:
    if args.input:
        request = _validate(PtonRequestModel, load_json(args.input), args.input)
        game, targets = request.to_game(), tuple(request.targets)
    elif args.game and args.targets:
        game, targets = load_game(args.game), load_targets(args.targets)
    else:
        raise UsageError("reduce pton needs --in, or both --game and --targets")
    if game.theta != 0:
        raise UsageError("The positive-weight transform takes a threshold-0 special-form game")
    return _trace_result(app, args, app.reductions.trace_pton(game.weights, targets, resolve_pvec(args.pvec, game.n)))


def cmd_invert(app: App, args) -> Result:
    targets = load_targets(args.targets)
    theta = parse_rational(args.theta)
    if args.mode == 'heuristic':
        result = app.inverse.iterative_banzhaf_heuristic(targets, iterations=args.iterations,
                                                         step=parse_rational(args.step), theta=theta)
    else:
        inst = InverseInstance(targets=targets, theta=theta, pvec=resolve_pvec(args.pvec, len(targets)))
        if args.mode == 'exact':
            result = app.inverse.inverse_exact(inst, bound=args.bound)
        else:
            result = app.inverse.inverse_nearest(inst, bound=args.bound, norm=args.norm)
    code = EXIT_NO if result.status == 'no_solution_in_class' else EXIT_OK
    return InverseResultModel.from_result(result), code


def cmd_verify(app: App, args) -> Result:
    game = load_game(args.game)
    targets = load_targets(args.targets)
    p = resolve_pvec(args.pvec, game.n)
    if args.via_inverse:
        answer = app.inverse.verification_via_inverse(game.weights, game.theta, targets, p)
    else:
        answer = app.semivalues.verify_semivalues(game, p, targets)
    return VerifyResultModel(result=answer), EXIT_OK if answer else EXIT_NO


def cmd_verify_restricted(app: App, args) -> Result:
    game = load_game(args.game)
    if game.theta != 0:
        raise UsageError("Restricted verification takes a threshold-0 special-form game")
    targets = load_targets(args.targets)
    answer = app.reductions.verify_restricted(game.weights, targets, resolve_pvec(args.pvec, game.n))
    return VerifyResultModel(result=answer), EXIT_OK if answer else EXIT_NO


def cmd_membership_cert(app: App, args) -> Result:
    if args.check:
        cert = _validate(CertificateModel, load_json(args.check), args.check).to_certificate()
        answer = app.reductions.verify_membership_certificate(cert, resolve_pvec(args.pvec, len(cert.point)))
        return VerifyResultModel(result=answer), EXIT_OK if answer else EXIT_NO
    request = _validate(MembershipRequestModel, load_json(args.input), args.input)
    p = resolve_pvec(args.pvec, len(request.point))
    cert = app.reductions.build_membership_certificate(request.point, [w.to_game() for w in request.witnesses], p)
    return CertificateModel.from_certificate(cert), EXIT_OK


def cmd_reasonable(app: App, args) -> Result:
    p = resolve_pvec(args.pvec, args.n)
    alpha = app.config.reasonable_alpha if args.alpha is None else parse_rational(args.alpha)
    beta = app.config.reasonable_beta if args.beta is None else parse_rational(args.beta)
    answer = is_reasonable(p, alpha, beta)
    return VerifyResultModel(result=answer), EXIT_OK if answer else EXIT_NO


# Invariants of the command line itself, run by selftest

def _write_json(directory: str, name: str, document: Any) -> str:
    path = os.path.join(directory, name)
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(document, handle)
    return path


def _run_to_file(config: SemivalueConfig, directory: str, name: str, argv: List[str]) -> Tuple[int, bytes]:
    path = os.path.join(directory, name)
    code = run(['--out', path] + argv, config=config)
    with open(path, 'rb') as handle:
        return code, handle.read()


def check_cli_determinism(config: SemivalueConfig, rng: random.Random) -> int:
    """Identical argv and inputs give byte-identical output"""
    with tempfile.TemporaryDirectory() as tmp:
        n = rng.randint(2, 5)
        game = _write_json(tmp, 'game.json', {"weights": [str(rng.randint(-9, 9)) for _ in range(n)],
                                              "theta": str(rng.randint(-9, 9))})
        vector = _write_json(tmp, 'vector.json', [rng.randint(-6, 6) for _ in range(n)])
        instance = _write_json(tmp, 'c112.json', {"c": [1, 1, 2], "k": 1})
        commands = [
            ['semivalues', '--game', game, '--pvec', f'shapley:{n}', '--method', 'dp'],
            ['khintchine', '--vec', vector, '--pvec', 'banzhaf'],
            ['reduce', 'rpartition', '--in', instance, '--pvec', 'banzhaf'],
        ]
        for index, argv in enumerate(commands):
            first = _run_to_file(config, tmp, f'{index}a.json', argv)
            second = _run_to_file(config, tmp, f'{index}b.json', argv)
            assert first[0] == EXIT_OK, f"{argv[0]} exited with {first[0]}"
            assert first == second, f"{argv[0]} output differs between runs"
    return len(commands)


def check_cli_round_trip(config: SemivalueConfig, rng: random.Random) -> int:
    """Outputs that are valid inputs elsewhere are read back unchanged"""
    with tempfile.TemporaryDirectory() as tmp:
        n = rng.randint(2, 4)
        game = _write_json(tmp, 'game.json', {"weights": [rng.randint(0, 5) for _ in range(n)],
                                              "theta": rng.randint(0, 5)})
        code, _ = _run_to_file(config, tmp, 'values.json', ['semivalues', '--game', game, '--pvec', 'banzhaf'])
        assert code == EXIT_OK
        code, verdict = _run_to_file(config, tmp, 'verdict.json', [
            'verify', '--game', game, '--targets', os.path.join(tmp, 'values.json'), '--pvec', 'banzhaf'])
        assert code == EXIT_OK and json.loads(verdict) == {"result": True}, "semivalues output fails verify"

        request = _write_json(tmp, 'request.json', {
            "point": ["3/4", "3/4", "-3/4", "-3/4"],
            "witnesses": [{"weights": [1, 1, -1, -1], "theta": 0}],
        })
        code, _ = _run_to_file(config, tmp, 'cert.json', ['membership-cert', '--in', request, '--pvec', 'banzhaf'])
        assert code == EXIT_OK
        code, verdict = _run_to_file(config, tmp, 'checked.json', [
            'membership-cert', '--check', os.path.join(tmp, 'cert.json'), '--pvec', 'banzhaf'])
        assert code == EXIT_OK and json.loads(verdict) == {"result": True}, "certificate does not check"
    return 2


def cmd_selftest(app: App, args) -> Result:
    kwargs = {} if args.seed is None else {'seed': args.seed}
    service = SelftestService.from_config(
        app.config, app.reductions, app.inverse, max_n=args.max_n, rounds=args.rounds,
        extra_checks=[
            ("cli_deterministic_output", partial(check_cli_determinism, app.config)),
            ("cli_round_trip", partial(check_cli_round_trip, app.config)),
        ],
        **kwargs,
    )
    report = service.run()
    return SelftestReportModel.from_report(report, include_timing=args.timing), EXIT_OK if report.passed else EXIT_NO


def _add_pvec(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--pvec', required=True,
                        help="banzhaf, shapley, banzhaf:N, shapley:N or a JSON file with the entries")


def create_parser() -> CliArgumentParser:
    parser = CliArgumentParser(prog='svf', description='Exact semivalues of weighted voting games')
    parser.add_argument('--out', help='write the JSON result to this path instead of stdout')
    parser.add_argument('--log-level', help='override LOG_LEVEL')
    parser.add_argument('--cap', type=int, help='override SVF_CAP, the largest n enumerated exhaustively')
    parser.add_argument('--jobs', type=int, help='override SVF_JOBS, worker processes for the pivot DP')
    parser.add_argument('--timing', action='store_true', help='include wall-clock timings in the output')
    subparsers = parser.add_subparsers(dest='command', parser_class=CliArgumentParser)
    subparsers.required = True

    semivalues = subparsers.add_parser('semivalues', help='semivalues of a game')
    semivalues.add_argument('--game', required=True)
    _add_pvec(semivalues)
    semivalues.add_argument('--method', choices=['brute', 'dp', 'auto'], default='auto')
    semivalues.set_defaults(handler=cmd_semivalues)

    chow = subparsers.add_parser('chow', help='degree-0 and degree-1 Chow parameters')
    chow.add_argument('--game', required=True)
    chow.set_defaults(handler=cmd_chow)

    for name, handler, helptext in (('khintchine', cmd_khintchine, 'Khintchine constant K_mu(a)'),
                                    ('partition-prob', cmd_partition_prob, 'Pr[w . x = 0]')):
        sub = subparsers.add_parser(name, help=helptext)
        sub.add_argument('--vector', '--vec', dest='vector', required=True)
        _add_pvec(sub)
        sub.add_argument('--method', choices=['dp', 'brute'], default='dp')
        sub.set_defaults(handler=handler)

    reduce = subparsers.add_parser('reduce', help='run one step of the reduction chain')
    steps = reduce.add_subparsers(dest='step', parser_class=CliArgumentParser)
    steps.required = True

    rpartition = steps.add_parser('rpartition')
    rpartition.add_argument('--in', dest='input', required=True)
    _add_pvec(rpartition)
    rpartition.set_defaults(handler=cmd_reduce_rpartition)

    khintchine = steps.add_parser('khintchine')
    khintchine.add_argument('--in', '--vector', dest='vector', required=True, help='special-form vector a')
    _add_pvec(khintchine)
    khintchine.add_argument('--y', help='perturbation y with 0 < y < 1/2 (default SVF_Y)')
    khintchine.set_defaults(handler=cmd_reduce_khintchine)

    optimize = steps.add_parser('optimize')
    optimize.add_argument('--in', '--vector', dest='vector', required=True, help='special-form objective a')
    _add_pvec(optimize)
    optimize.add_argument('--mode', choices=['closed_form', 'vertex_enum'], default='closed_form')
    optimize.add_argument('--bound', type=int)
    optimize.set_defaults(handler=cmd_reduce_optimize)

    pton = steps.add_parser('pton')
    pton.add_argument('--in', dest='input', help='{"weights": [...], "theta": 0, "targets": [...]}')
    pton.add_argument('--game')
    pton.add_argument('--targets')
    _add_pvec(pton)
    pton.set_defaults(handler=cmd_reduce_pton)

    invert = subparsers.add_parser('invert', help='find a game with the given semivalues')
    invert.add_argument('--targets', required=True)
    invert.add_argument('--theta', default='0')
    invert.add_argument('--pvec', default='banzhaf')
    invert.add_argument('--mode', choices=['exact', 'nearest', 'heuristic'], default='exact')
    invert.add_argument('--bound', type=int)
    invert.add_argument('--norm', choices=['l1', 'l2'], default='l1')
    invert.add_argument('--iterations', type=int, default=10)
    invert.add_argument('--step', default='1')
    invert.set_defaults(handler=cmd_invert)

    verify = subparsers.add_parser('verify', help='compare a game\'s semivalues with targets')
    verify.add_argument('--game', required=True)
    verify.add_argument('--targets', required=True)
    _add_pvec(verify)
    verify.add_argument('--via-inverse', action='store_true',
                        help='decide through the inverse solver and a disagreement search')
    verify.set_defaults(handler=cmd_verify)

    restricted = subparsers.add_parser('verify-restricted', help='verification for special-form games')
    restricted.add_argument('--game', required=True)
    restricted.add_argument('--targets', required=True)
    _add_pvec(restricted)
    restricted.set_defaults(handler=cmd_verify_restricted)

    membership = subparsers.add_parser('membership-cert', help='build or check a convex-combination certificate')
    source = membership.add_mutually_exclusive_group(required=True)
    source.add_argument('--in', dest='input', help='point and witness games to certify')
    source.add_argument('--check', help='certificate to verify')
    _add_pvec(membership)
    membership.set_defaults(handler=cmd_membership_cert)

    reasonable = subparsers.add_parser('reasonable', help='is the probability vector reasonable')
    _add_pvec(reasonable)
    reasonable.add_argument('--n', type=int, help='player count for a bare preset name')
    reasonable.add_argument('--alpha', help='lower fraction (default SVF_REASONABLE_ALPHA)')
    reasonable.add_argument('--beta', help='upper fraction (default SVF_REASONABLE_BETA)')
    reasonable.set_defaults(handler=cmd_reasonable)

    selftest = subparsers.add_parser('selftest', help='run the invariant suite')
    selftest.add_argument('--max-n', type=int, default=6)
    selftest.add_argument('--rounds', type=int, default=10)
    selftest.add_argument('--seed', type=int)
    selftest.set_defaults(handler=cmd_selftest)

    return parser


def render(document: BaseModel) -> str:
    """Deterministic JSON: sorted keys, fixed separators, no null fields"""
    return json.dumps(document.model_dump(mode='json', exclude_none=True), sort_keys=True,
                      separators=(',', ':')) + "\n"


def error_document(e: SemivalueError) -> ErrorModel:
    # details may carry tuples or Fractions from deep inside a service
    details = json.loads(json.dumps(e.details, default=str))
    return ErrorModel(error=e.code, message=e.message, details=details)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, 'w', encoding='utf-8') as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def run(argv: Optional[List[str]] = None, config: Optional[SemivalueConfig] = None) -> int:
    """
    Parse argv, dispatch to the named operation and write its JSON result

    Returns:
        int: 0 for ok/found/true, 1 for NO/false/failed checks, 2 for errors
    """
    parser = create_parser()
    out = None
    try:
        args = parser.parse_args(argv)
        out = args.out
        config = config or SemivalueConfig()
        setup_logging(args.log_level or config.log_level)
        if args.cap is not None:
            config.cap = args.cap
        if args.jobs is not None:
            config.jobs = args.jobs
        if not config.validate():
            raise UsageError("Invalid configuration", config.as_dict())

        app = create_app(config)
        handler: Callable[[App, Any], Result] = args.handler
        logger.logjson("DEBUG", "Dispatching command", {"command": args.command})
        document, code = handler(app, args)
        app.metrics.log_metrics()
        _emit(render(document), out)
        return code
    except UsageError as e:
        sys.stderr.write(parser.format_usage())
        _emit(render(error_document(e)), out)
        return EXIT_ERROR
    except SemivalueError as e:
        logger.logjson("ERROR", "Command failed", e.to_dict())
        _emit(render(error_document(e)), out)
        return EXIT_ERROR
    except Exception as e:
        # exit code 1 means NO, so nothing may escape with Python's default status
        logger.exception("Unexpected failure")
        _emit(render(ErrorModel(error="InternalError", message=f"{type(e).__name__}: {e}")), out)
        return EXIT_ERROR
