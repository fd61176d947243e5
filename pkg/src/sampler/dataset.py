"""查询数据集的批量生成、清单写出与读取"""

import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, Field
from tqdm import tqdm

from ..graph.store import ALL_SPLITS, HyperGraph, Split
from ..query.shapes import ALL_TYPES, QueryType
from ..utils.exceptions import ArityUnavailableError, DataError, SamplingExhaustedError
from .sampler import GroundedQuery, QuerySampler, derive_seed

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
SEED_ATTEMPTS = 8

Counts = Mapping[Union[str, Split], Mapping[Union[str, QueryType], int]]


class FileEntry(BaseModel):
    records: int
    sha256: str


class DatasetManifest(BaseModel):
    """数据集清单：各划分各类型条数、全局种子、源图摘要与文件校验和"""
    seed: int
    graph_digest: str
    requested: Dict[str, Dict[str, int]] = Field(default_factory=dict)
    counts: Dict[str, Dict[str, int]] = Field(default_factory=dict)
    errors: Dict[str, str] = Field(default_factory=dict)
    files: Dict[str, FileEntry] = Field(default_factory=dict)

    @property
    def shortfall(self) -> Dict[str, Dict[str, int]]:
        """请求数与实际产出之差（只列出不足的类型）"""
        missing = {}
        for split, per_type in self.requested.items():
            for query_type, wanted in per_type.items():
                got = self.counts.get(split, {}).get(query_type, 0)
                if got < wanted:
                    missing.setdefault(split, {})[query_type] = wanted - got
        return missing

    def write(self, out_dir: str) -> str:
        path = os.path.join(out_dir, MANIFEST_NAME)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.model_dump(), f, sort_keys=True, indent=2)
            f.write('\n')
        return path


def _normalize_counts(counts: Counts) -> Dict[Split, Dict[QueryType, int]]:
    normalized: Dict[Split, Dict[QueryType, int]] = {}
    for split, per_type in counts.items():
        bucket = normalized.setdefault(Split(split), {})
        for query_type, count in per_type.items():
            if count < 0:
                raise ValueError(f"数量不能为负: {split}/{query_type}={count}")
            bucket[QueryType(query_type)] = int(count)
    return normalized


def _sample_item(sampler: QuerySampler, seed: int, split: Split, query_type: QueryType,
                 index: int) -> Optional[GroundedQuery]:
    """同一坐标最多尝试 SEED_ATTEMPTS 个派生种子"""
    for attempt in range(SEED_ATTEMPTS):
        item_seed = derive_seed(seed, split.value, query_type.value, index, attempt)
        try:
            return sampler.sample(query_type, split, item_seed)
        except SamplingExhaustedError:
            continue
    return None


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(1 << 16), b''):
            digest.update(block)
    return digest.hexdigest()


def generate_dataset(
    graph: HyperGraph,
    counts: Counts,
    seed: int,
    out_dir: str,
    threads: int = 1,
    progress: bool = False,
) -> DatasetManifest:
    """按划分写出 {split}.jsonl，记录顺序为 (类型, 序号)，与调度无关

    条目种子由 (seed, split, type, index) 派生；某类型产出不足时记入清单并保留已生成的部分。
    """
    plan = _normalize_counts(counts)
    os.makedirs(out_dir, exist_ok=True)
    sampler = QuerySampler(graph)
    sampler.warm_up([split for split in ALL_SPLITS if split in plan])

    manifest = DatasetManifest(seed=seed, graph_digest=graph.digest())
    for split in ALL_SPLITS:
        if split not in plan:
            continue
        per_type = plan[split]
        jobs: List[Tuple[QueryType, int]] = []
        for query_type in ALL_TYPES:
            wanted = per_type.get(query_type)
            if wanted is None:
                continue
            manifest.requested.setdefault(split.value, {})[query_type.value] = wanted
            manifest.counts.setdefault(split.value, {})[query_type.value] = 0
            try:
                sampler.require_arity(query_type, split)
            except ArityUnavailableError as exc:
                manifest.errors[f"{split.value}/{query_type.value}"] = str(exc)
                logger.error("%s/%s: %s", split.value, query_type.value, exc)
                continue
            jobs.extend((query_type, index) for index in range(wanted))

        def run(job: Tuple[QueryType, int]) -> Optional[GroundedQuery]:
            return _sample_item(sampler, seed, split, job[0], job[1])

        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            results = list(tqdm(pool.map(run, jobs), total=len(jobs), desc=split.value, disable=not progress))

        path = os.path.join(out_dir, f"{split.value}.jsonl")
        with open(path, 'w', encoding='utf-8') as f:
            for (query_type, _), query in zip(jobs, results):
                if query is None:
                    continue
                f.write(json.dumps(query.to_record(), sort_keys=True, separators=(',', ':')))
                f.write('\n')
                manifest.counts[split.value][query_type.value] += 1
        records = sum(manifest.counts[split.value].values())
        manifest.files[os.path.basename(path)] = FileEntry(records=records, sha256=_sha256(path))
        logger.info("%s: 写出 %d 条查询到 %s", split.value, records, path)

    for split, missing in manifest.shortfall.items():
        for query_type, amount in missing.items():
            if f"{split}/{query_type}" not in manifest.errors:
                logger.warning("%s/%s 少生成 %d 条（重试预算耗尽）", split, query_type, amount)
    manifest.write(out_dir)
    return manifest


def load_manifest(data_dir: str) -> DatasetManifest:
    path = os.path.join(data_dir, MANIFEST_NAME)
    if not os.path.exists(path):
        raise DataError(f"缺少数据集清单: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        return DatasetManifest.model_validate(json.load(f))


def load_queries(
    data_dir: str,
    split: Union[str, Split],
    types: Optional[Iterable[Union[str, QueryType]]] = None,
    verify: bool = True,
) -> List[GroundedQuery]:
    """读取某划分的查询；verify 时核对清单中的校验和与条数"""
    split = Split(split)
    name = f"{split.value}.jsonl"
    path = os.path.join(data_dir, name)
    if not os.path.exists(path):
        raise DataError(f"缺少查询文件: {path}")
    if verify:
        entry = load_manifest(data_dir).files.get(name)
        if entry is None or entry.sha256 != _sha256(path):
            raise DataError(f"查询文件与清单不符: {path}")

    wanted = None if types is None else {QueryType(t) for t in types}
    queries = []
    with open(path, 'r', encoding='utf-8') as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            query = GroundedQuery.from_record(json.loads(line))
            if wanted is None or query.type in wanted:
                queries.append(query)
    return queries
