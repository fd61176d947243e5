"""--pretty 模式下的人类可读表格"""

from typing import Dict, List, Sequence

import pandas as pd


def _render(df: pd.DataFrame) -> str:
    if df.empty:
        return "(空)"
    return df.to_string(index=False, float_format=lambda value: f"{value:.4f}")


def stats_table(stats: Dict) -> str:
    """图统计：划分事实数与元数分布"""
    facts = pd.DataFrame(
        [{"划分": split, "事实数": count} for split, count in stats["facts"].items()]
    )
    arity = pd.DataFrame(
        [{"元数": int(n), "事实数": count} for n, count in stats["arity"].items()]
    )
    lines = [
        f"实体: {stats['entities']}  关系: {stats['relations']}  "
        f"重复: {stats['duplicates']}  自反限定符: {stats['reflexive_qualifiers']}",
        _render(facts),
        "",
        _render(arity),
    ]
    return "\n".join(lines)


def manifest_table(manifest: Dict) -> str:
    rows = []
    for split, per_type in manifest["counts"].items():
        for query_type, count in per_type.items():
            rows.append({
                "划分": split,
                "类型": query_type,
                "请求": manifest["requested"].get(split, {}).get(query_type, 0),
                "生成": count,
            })
    lines = [_render(pd.DataFrame(rows))]
    for key, message in manifest.get("errors", {}).items():
        lines.append(f"错误 {key}: {message}")
    return "\n".join(lines)


def answers_table(answers: Sequence[Dict]) -> str:
    return _render(pd.DataFrame(answers, columns=["id", "label"]))


def eval_table(report: Dict) -> str:
    """按类型的 MRR / Hits@K，末尾附 AVG_p 与 AVG_n"""
    rows = []
    for query_type, metrics in report["per_type"].items():
        row = {"类型": query_type, "查询数": metrics["queries"], "MRR": metrics["mrr"]}
        row.update({f"Hits@{k}": value for k, value in metrics["hits"].items()})
        rows.append(row)
    df = pd.DataFrame(rows)
    lines = [_render(df)]
    for name in ("avg_p", "avg_n"):
        value = report.get(name)
        lines.append(f"{name.upper()}: {'-' if value is None else f'{value:.4f}'}")
    if report.get("missing_types"):
        lines.append(f"缺少类型: {', '.join(report['missing_types'])}")
    return "\n".join(lines)


def inspection_table(blocks: List[Dict]) -> str:
    """逐变量 Top-N：名次 / 答案 / 概率 / 标注"""
    sections = []
    for block in blocks:
        df = pd.DataFrame(block["rows"])
        if not df.empty:
            df = df[["rank", "label", "probability", "tag"]]
            df.columns = ["Rank", "Answer", "Probability", "Easy/Hard"]
            df["Easy/Hard"] = df["Easy/Hard"].fillna("-")
        sections.append(f"[{block['name']}]")
        sections.append(_render(df))
        sections.append(f"阈值答案: {', '.join(block['thresholded']) or '(空)'}")
        sections.append("")
    return "\n".join(sections).rstrip()
