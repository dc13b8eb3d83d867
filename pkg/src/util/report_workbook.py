import os
from datetime import datetime
from typing import Sequence

import xlsxwriter

from models.records import ValuationRow, Zone
from util.log_config import setup_logging

logger = setup_logging("report_workbook")

REPORT_CREATED = datetime(1980, 1, 1)

ZONE_FORMATS = {
    Zone.UNDERVALUED: 'cell_green',
    Zone.NORMAL: 'cell_yellow',
    Zone.OVERVALUED: 'cell_red',
}


def _add_formats(workbook) -> dict:
    return {
        'title': workbook.add_format({'bold': True, 'font_size': 16, 'align': 'center', 'bg_color': '#4F81BD', 'font_color': 'white'}),
        'header': workbook.add_format({'bold': True, 'bg_color': '#D3D3D3', 'border': 1, 'align': 'center'}),
        'cell': workbook.add_format({'border': 1, 'font_size': 12}),
        'cell_bold': workbook.add_format({'border': 1, 'bold': True, 'font_size': 12}),
        'cell_green': workbook.add_format({'border': 1, 'bg_color': '#C6EFCE', 'font_size': 12}),
        'cell_yellow': workbook.add_format({'border': 1, 'bg_color': '#FFEB9C', 'font_size': 12}),
        'cell_red': workbook.add_format({'border': 1, 'bg_color': '#FFC7CE', 'font_size': 12}),
        'number': workbook.add_format({'border': 1, 'num_format': '0.00', 'font_size': 12}),
        'ratio': workbook.add_format({'border': 1, 'num_format': '0.000000', 'font_size': 12}),
        'percent': workbook.add_format({'border': 1, 'num_format': '0.00%', 'font_size': 12}),
    }


def _write_optional(worksheet, row, col, value, cell_format, blank_format):
    if value is None:
        worksheet.write_blank(row, col, None, blank_format)
    else:
        worksheet.write_number(row, col, value, cell_format)


def write_valuation_sheet(workbook, formats: dict, rows: Sequence[ValuationRow], occupancy: dict) -> None:
    """One line per PU day, the zone column colored green/yellow/red."""
    worksheet = workbook.add_worksheet("Valuation")
    worksheet.set_column('A:A', 14)
    worksheet.set_column('B:J', 16)
    worksheet.merge_range('A1:J1', 'PU ratio and valuation zones', formats['title'])

    headers = ['Date', 'Price (USD)', 'Velocity', 'Staking ratio', 'Volatility', 'Dilution',
               'Token utility', 'PU', 'Zone', 'Floored']
    for col, header in enumerate(headers):
        worksheet.write(2, col, header, formats['header'])

    current_row = 3
    for row in rows:
        zone_format = formats[ZONE_FORMATS[row.point.zone]]
        worksheet.write(current_row, 0, row.point.date.isoformat(), formats['cell'])
        worksheet.write_number(current_row, 1, float(row.point.price_usd), formats['number'])
        for col, value in enumerate((row.inputs.velocity, row.inputs.staking_ratio,
                                     row.inputs.volatility, row.inputs.dilution), start=2):
            _write_optional(worksheet, current_row, col, value, formats['ratio'], formats['cell'])
        worksheet.write_number(current_row, 6, row.point.token_utility, formats['number'])
        worksheet.write_number(current_row, 7, row.point.pu, zone_format)
        worksheet.write(current_row, 8, row.point.zone.value, zone_format)
        worksheet.write(current_row, 9, "yes" if row.floored else "no", formats['cell'])
        current_row += 1

    current_row += 1
    worksheet.write(current_row, 0, "Days per zone", formats['cell_bold'])
    current_row += 1
    for zone in Zone:
        worksheet.write(current_row, 0, zone.value, formats[ZONE_FORMATS[zone]])
        worksheet.write_number(current_row, 1, occupancy.get(zone.value, 0.0), formats['percent'])
        current_row += 1
    worksheet.freeze_panes(3, 0)


def write_backtest_sheet(workbook, formats: dict, summaries: Sequence[dict]) -> None:
    """Strategies side by side; the best ROI is highlighted."""
    worksheet = workbook.add_worksheet("Backtest")
    worksheet.set_column('A:A', 20)
    worksheet.set_column('B:G', 18)
    worksheet.merge_range('A1:G1', 'Strategy comparison', formats['title'])

    headers = ['Strategy', 'Final equity (USD)', 'ROI (%)', 'Sharpe (ann.)', 'Max drawdown (%)', 'Trades',
               'Trading days']
    for col, header in enumerate(headers):
        worksheet.write(2, col, header, formats['header'])

    best = max((s['roi_percent'] for s in summaries), default=None)
    current_row = 3
    for summary in summaries:
        name_format = formats['cell_green'] if summary['roi_percent'] == best else formats['cell']
        worksheet.write(current_row, 0, summary['strategy'], name_format)
        worksheet.write_number(current_row, 1, float(summary['final_equity_usd']), formats['number'])
        worksheet.write_number(current_row, 2, summary['roi_percent'], formats['number'])
        _write_optional(worksheet, current_row, 3, summary['sharpe_annualized'], formats['number'], formats['cell'])
        worksheet.write_number(current_row, 4, summary['max_drawdown_percent'], formats['number'])
        worksheet.write_number(current_row, 5, summary['trade_count'], formats['cell'])
        worksheet.write_number(current_row, 6, summary['trading_days'], formats['cell'])
        current_row += 1
    worksheet.freeze_panes(3, 0)


def create_report_workbook(f_path: str, valuation_rows: Sequence[ValuationRow] = (), occupancy: dict = None,
                           backtest_summaries: Sequence[dict] = ()) -> None:
    """Create an Excel workbook with a valuation sheet and/or a backtest sheet.

    Args:
        f_path (str): File path for saving the workbook.
        valuation_rows (Sequence[ValuationRow]): rows of the valuation sheet, skipped when empty.
        occupancy (dict): zone name -> share of PU days.
        backtest_summaries (Sequence[dict]): strategy summaries, skipped when empty.
    """
    logger.info(f"Creating report workbook at: {f_path}")
    output_dir = os.path.dirname(f_path)
    if output_dir:
        os.makedirs(output_dir, exist_ok=True)

    workbook = xlsxwriter.Workbook(f_path)
    workbook.set_properties({'title': 'coinlens report', 'created': REPORT_CREATED})
    formats = _add_formats(workbook)
    if valuation_rows:
        write_valuation_sheet(workbook, formats, valuation_rows, occupancy or {})
    if backtest_summaries:
        write_backtest_sheet(workbook, formats, backtest_summaries)
    if not valuation_rows and not backtest_summaries:
        workbook.add_worksheet("Empty")
    workbook.close()
    logger.info(f"Workbook generated: {f_path}")
