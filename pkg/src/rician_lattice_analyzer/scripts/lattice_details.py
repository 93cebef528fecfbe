import csv
import io
import json
import math
import os
import sys

SWEEP_VNR_HEADER = ('rotation', 'dim', 'q', 'K', 'vnr_db', 'trials', 'errors', 'error_rate', 'stderr')
SWEEP_K_HEADER = ('rotation', 'dim', 'q', 'vnr_db', 'K', 'trials', 'errors', 'error_rate', 'stderr')
NONWR_HEADER = ('dim', 'K', 'method', 'trials', 'estimate', 'stderr')
PEP_HEADER = ('rotation', 'dim', 'K', 'vnr_db', 'mode', 'truncation_bound', 'terms', 'value', 'stderr')


def significant_digits(text):
    mantissa = text.lstrip('-').split('e')[0].replace('.', '')
    return len(mantissa.lstrip('0'))


def format_number(value):
    """
    Shortest round-trip representation, padded to at least 6 significant digits:
    0.1234567 -> '0.1234567', 0.5 -> '0.500000', 3 -> '3'
    """
    if isinstance(value, (bool, str)):
        return str(value)
    if isinstance(value, int) or (hasattr(value, 'dtype') and value.dtype.kind in 'iu'):
        return str(int(value))
    value = float(value)
    if not math.isfinite(value):
        return repr(value)
    text = repr(value)
    if significant_digits(text) >= 6:
        return text
    return format(value, '#.6g')


def format_csv(header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(value) for value in row])
    return buffer.getvalue()


def write_output(text, out_path=None):
    """Writes to stdout, or to out_path through a temporary file so partial output never appears"""
    if not out_path:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    tmp_path = f"{out_path}.tmp"
    try:
        with open(tmp_path, 'w', encoding='utf-8', newline='') as fh:
            fh.write(text)
        os.replace(tmp_path, out_path)
    except OSError:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def get_json_value(value):
    if hasattr(value, 'item'):
        return value.item()
    if isinstance(value, dict):
        return {str(k): get_json_value(v) for k, v in value.items()}
    return value


def get_json_finding(finding):
    return {"desc": finding.text, "metric": finding.metric, "value": get_json_value(finding.value)}


def format_audit_report_json(problems, lattice, sum_total_checks, execution_start_time, runtime):
    total_findings = 0
    entries = []
    for audit_info, findings in problems.items():
        audit_name, audit_description = audit_info[0]
        total_checks = audit_info[1]
        total_findings += len(findings)
        entries.append({"audit_name": audit_name, "description": audit_description, "total_checks": total_checks,
                        "findings": [get_json_finding(finding) for finding in findings]})
    data = {"lattice": lattice.name,
            "n": lattice.n,
            "volume": lattice.volume,
            "date_execution": execution_start_time,
            "runtime": round(runtime, 2),
            "total_findings": total_findings,
            "total_checks": sum_total_checks,
            "entries": entries
            }
    return json.dumps(data, indent=2) + '\n'


def format_audit_report_text(problems, lattice):
    lines = [f"lattice: {lattice.name}", f"n = {lattice.n}", f"volume = {lattice.volume:.12g}", '']
    for audit_info, findings in problems.items():
        (audit_name, audit_description), count_checks = audit_info
        lines.append("#" * 80)
        lines.append(f"{audit_name}: {audit_description} ({count_checks} checks)")
        lines.append("#" * 80)
        if findings:
            lines.extend(finding.text for finding in findings)
        else:
            lines.append('(skipped)')
        lines.append('')
    return '\n'.join(lines)
