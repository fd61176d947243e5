"""nqe 命令行：导入事实、采样数据集、符号求解、训练、评估与逐变量检视"""

import json
import logging
import os
from typing import Dict, List, Optional

import click
from dotenv import load_dotenv
from pydantic import ValidationError

from .components import report_tables
from .executor import brute_force_execute, execute
from .graph import HyperGraph, Split, load_facts, load_graph, normalize_scope, save_graph
from .graph.synthetic import SyntheticSpec, generate_graph, write_jsonl
from .model import load_checkpoint
from .query import compile_query, parse, to_text
from .query.shapes import QueryType
from .sampler import generate_dataset, load_queries
from .training import evaluate, inspect_program, register_answers, train
from .training.variants import VariantRegistry, build_train_config
from .utils.config import ensure_directories, get_settings, load_run_config
from .utils.exceptions import ArityUnavailableError, ConfigError, InputError, NQEError
from .utils.logger import set_logger

logger = logging.getLogger(__name__)


class NQEGroup(click.Group):
    """把库异常映射为退出码，并在 stderr 输出 JSON 错误对象"""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except NQEError as e:
            _fail(ctx, e)
        except ValidationError as e:
            _fail(ctx, ConfigError(f"配置无效: {e}"))
        except OSError as e:
            _fail(ctx, InputError(f"{e.strerror}: {e.filename}"))


def _fail(ctx: click.Context, error: NQEError):
    payload = {"error": type(error).__name__, "message": str(error), "exit_code": error.exit_code}
    for attribute in ("line_number", "offset"):
        value = getattr(error, attribute, None)
        if value is not None:
            payload[attribute] = value
    click.echo(json.dumps(payload, ensure_ascii=False), err=True)
    ctx.exit(error.exit_code)


def _emit(ctx: click.Context, payload: Dict, table=None):
    """默认输出 JSON；--pretty 时输出表格"""
    if ctx.obj["pretty"] and table is not None:
        click.echo(table(payload))
    else:
        click.echo(json.dumps(payload, ensure_ascii=False, sort_keys=True))


def parse_counts(spec: str, splits: List[Split]) -> Dict[Split, Dict[QueryType, int]]:
    """'1p=100,2i=50,train:2cp=10'：无前缀的条目作用于 splits 中的每个划分"""
    counts: Dict[Split, Dict[QueryType, int]] = {}
    for entry in filter(None, (part.strip() for part in spec.split(','))):
        try:
            key, value = entry.split('=')
            targets = splits
            if ':' in key:
                split_name, key = key.split(':')
                targets = [Split(split_name.strip())]
            query_type, count = QueryType(key.strip()), int(value)
        except ValueError:
            raise InputError(f"无法解析数量条目: {entry!r}")
        if count < 0:
            raise InputError(f"数量不能为负: {entry!r}")
        for split in targets:
            counts.setdefault(split, {})[query_type] = count
    return counts


def _labels(graph: HyperGraph, ids) -> List[Dict]:
    return [{"id": i, "label": graph.entities.label(i)} for i in sorted(ids)]


def _graph_from_labels(entity_labels: List[str], relation_labels: List[str]) -> HyperGraph:
    graph = HyperGraph()
    for label in entity_labels:
        graph.entities.intern(label)
    for label in relation_labels:
        graph.relations.intern(label)
    return graph


@click.group(cls=NQEGroup)
@click.option('--pretty', is_flag=True, default=False, help='以表格代替 JSON 输出')
@click.option('--threads', type=int, default=None, help='计算线程数，1为可复现模式')
@click.option('--progress', is_flag=True, default=False, help='显示进度条')
@click.option('--log-level', default=None, help='日志级别')
@click.pass_context
def cli(ctx, pretty, threads, progress, log_level):
    """超关系知识图谱上的 N 元一阶逻辑查询"""
    load_dotenv()
    settings = get_settings()
    set_logger(log_level or settings.log_level, settings.log_file)
    ctx.ensure_object(dict)
    ctx.obj.update(pretty=pretty, threads=threads or settings.threads, progress=progress, settings=settings)


@cli.command()
@click.option('--out', 'out_dir', required=True, type=click.Path(file_okay=False), help='事实文件输出目录')
@click.option('--store', default=None, type=click.Path(dir_okay=False), help='同时写出二进制快照')
@click.option('--entities', default=200, show_default=True)
@click.option('--relations', default=20, show_default=True)
@click.option('--facts', default=2000, show_default=True)
@click.option('--qualifier-fraction', default=0.35, show_default=True)
@click.option('--seed', type=int, default=None)
@click.pass_context
def synth(ctx, out_dir, store, entities, relations, facts, qualifier_fraction, seed):
    """生成确定性的合成超关系图"""
    spec = SyntheticSpec(
        num_entities=entities,
        num_relations=relations,
        num_facts=facts,
        qualifier_fraction=qualifier_fraction,
        seed=ctx.obj["settings"].seed if seed is None else seed,
    )
    graph = generate_graph(spec)
    paths = write_jsonl(graph, out_dir)
    if store:
        ensure_directories(store)
        save_graph(graph, store)
    _emit(ctx, {"files": paths, "store": store, "stats": graph.stats()})


@cli.command()
@click.option('--facts', 'facts_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--split', required=True, type=click.Choice([s.value for s in Split]))
@click.option('--out', 'store', required=True, type=click.Path(dir_okay=False), help='二进制存储；已存在时追加')
@click.option('--format', 'fmt', type=click.Choice(['jsonl', 'tsv']), default=None)
@click.pass_context
def ingest(ctx, facts_path, split, store, fmt):
    """导入事实文件到二进制存储"""
    graph = load_graph(store) if os.path.exists(store) else HyperGraph()
    stats = load_facts(graph, facts_path, split, fmt)
    ensure_directories(store)
    save_graph(graph, store)
    payload = {"load": stats.model_dump(mode='json'), "stats": graph.stats()}
    _emit(ctx, payload, lambda p: report_tables.stats_table(p["stats"]))


@cli.command()
@click.option('--store', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--counts', required=True, help="例如 '1p=100,2i=50' 或 'train:1p=1000'")
@click.option('--splits', default='train,valid,test', show_default=True, help='无前缀数量条目作用的划分')
@click.option('--seed', type=int, default=None, help='默认取 NQE_SEED')
@click.option('--out', 'out_dir', required=True, type=click.Path(file_okay=False))
@click.pass_context
def sample(ctx, store, counts, splits, seed, out_dir):
    """采样带 easy/hard 答案的查询数据集"""
    try:
        split_list = sorted(normalize_scope(splits), key=lambda s: list(Split).index(s))
    except ValueError as e:
        raise InputError(str(e))
    plan = parse_counts(counts, split_list)
    graph = load_graph(store)
    seed = ctx.obj["settings"].seed if seed is None else seed
    manifest = generate_dataset(graph, plan, seed, out_dir, threads=ctx.obj["threads"], progress=ctx.obj["progress"])
    payload = manifest.model_dump()
    _emit(ctx, payload, report_tables.manifest_table)
    if manifest.errors:
        raise ArityUnavailableError("; ".join(f"{key}: {message}" for key, message in sorted(manifest.errors.items())))


@cli.command()
@click.option('--store', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--query', 'text', required=True, help='查询表达式')
@click.option('--scope', default='train,valid,test', show_default=True)
@click.option('--brute-force', is_flag=True, default=False, help='用暴力枚举求解（小图）')
@click.pass_context
def answer(ctx, store, text, scope, brute_force):
    """符号求解查询"""
    graph = load_graph(store)
    ast = parse(text, graph)
    try:
        scope_set = normalize_scope(scope)
    except ValueError as e:
        raise InputError(str(e))
    answers = brute_force_execute(ast, graph, scope_set) if brute_force else execute(ast, graph, scope_set)
    payload = {
        "query": to_text(ast, graph),
        "scope": sorted(s.value for s in scope_set),
        "count": len(answers),
        "answers": _labels(graph, answers),
    }
    _emit(ctx, payload, lambda p: report_tables.answers_table(p["answers"]))


def _resolve(flag: Optional[str], configured: Optional[str], name: str) -> str:
    value = flag or configured
    if not value:
        raise ConfigError(f"缺少路径参数 --{name}（命令行或配置文件 [paths]）")
    return value


@cli.command(name='train')
@click.option('--store', default=None, type=click.Path(dir_okay=False))
@click.option('--data', default=None, type=click.Path(file_okay=False))
@click.option('--config', 'config_path', default=None, type=click.Path(dir_okay=False))
@click.option('--checkpoint', default=None, type=click.Path(dir_okay=False))
@click.option('--loss-curve', default=None, type=click.Path(dir_okay=False))
@click.option('--variant', default=None, type=click.Choice(VariantRegistry.get_available_variants()))
@click.option('--epochs', type=int, default=None)
@click.option('--seed', type=int, default=None)
@click.pass_context
def train_command(ctx, store, data, config_path, checkpoint, loss_curve, variant, epochs, seed):
    """训练模型，写出检查点与损失曲线"""
    run = load_run_config(config_path)
    store = _resolve(store, run.paths.store, 'store')
    data = _resolve(data, run.paths.data, 'data')
    checkpoint = _resolve(checkpoint, run.paths.checkpoint, 'checkpoint')
    loss_curve = loss_curve or run.paths.loss_curve or os.path.splitext(checkpoint)[0] + '.loss.csv'

    overrides = run.train_overrides()
    overrides['threads'] = ctx.obj["threads"]
    overrides.setdefault('seed', ctx.obj["settings"].seed)
    if epochs is not None:
        overrides['epochs'] = epochs
    if seed is not None:
        overrides['seed'] = seed
    config = build_train_config(variant or run.train.variant or "NQE", **overrides)

    graph = load_graph(store)
    queries = load_queries(data, Split.TRAIN)
    result = train(graph, queries, config, checkpoint, loss_curve, progress=ctx.obj["progress"])
    _emit(ctx, {
        "checkpoint": checkpoint,
        "loss_curve": loss_curve,
        "epochs_run": result.epochs_run,
        "examples": result.num_examples,
        "final_loss": result.loss_curve[-1] if result.loss_curve else None,
    })


@cli.command(name='eval')
@click.option('--store', default=None, type=click.Path(dir_okay=False))
@click.option('--data', default=None, type=click.Path(file_okay=False))
@click.option('--config', 'config_path', default=None, type=click.Path(dir_okay=False))
@click.option('--checkpoint', default=None, type=click.Path(dir_okay=False))
@click.option('--split', default='test', type=click.Choice([s.value for s in Split]), show_default=True)
@click.option('--ranked', default='hard', type=click.Choice(['hard', 'all']), show_default=True)
@click.option('--report', default=None, type=click.Path(dir_okay=False), help='同时把报告写入文件')
@click.pass_context
def eval_command(ctx, store, data, config_path, checkpoint, split, ranked, report):
    """过滤排名评估：按类型 MRR / Hits@K 与 AVG_p、AVG_n"""
    run = load_run_config(config_path)
    data = _resolve(data, run.paths.data, 'data')
    checkpoint = _resolve(checkpoint, run.paths.checkpoint, 'checkpoint')
    report = report or run.paths.report
    loaded = load_checkpoint(checkpoint)
    store = store or run.paths.store
    if store:
        graph = load_graph(store)
        if graph.num_entities != loaded.model.num_entities:
            raise InputError(f"检查点实体数 {loaded.model.num_entities} 与存储 {graph.num_entities} 不一致")

    queries = load_queries(data, split)
    result = evaluate(loaded.model, queries, loaded.logic, ranked=ranked, progress=ctx.obj["progress"])
    payload = result.model_dump()
    if report:
        ensure_directories(report)
        with open(report, 'w', encoding='utf-8') as f:
            json.dump(payload, f, ensure_ascii=False, sort_keys=True, indent=2)
    _emit(ctx, payload, report_tables.eval_table)


@cli.command()
@click.option('--checkpoint', required=True, type=click.Path(dir_okay=False))
@click.option('--query', 'text', required=True)
@click.option('--top', default=10, show_default=True)
@click.option('--threshold', default=0.5, show_default=True, type=float)
@click.option('--store', default=None, type=click.Path(exists=True, dir_okay=False), help='给出时标注 easy/hard 答案')
@click.pass_context
def query(ctx, checkpoint, text, top, threshold, store):
    """逐变量列出 Top-N 预测与阈值答案集"""
    loaded = load_checkpoint(checkpoint)
    if store:
        graph = load_graph(store)
    elif loaded.entity_labels is not None and loaded.relation_labels is not None:
        graph = _graph_from_labels(loaded.entity_labels, loaded.relation_labels)
    else:
        graph = None
    ast = parse(text, graph)
    program = compile_query(ast)
    answers = register_answers(ast, graph, Split.TEST) if store else None
    blocks = inspect_program(
        loaded.model,
        program,
        loaded.logic,
        top=top,
        threshold=threshold,
        labels=graph.entities.labels if graph is not None else None,
        answers=answers,
    )
    payload = {
        "query": to_text(ast, graph),
        "blocks": [block.model_dump() for block in blocks],
    }
    _emit(ctx, payload, lambda p: report_tables.inspection_table(p["blocks"]))


def main():
    cli(prog_name='nqe')


if __name__ == '__main__':
    main()
