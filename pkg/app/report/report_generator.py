"""
PDF summary of certificates and solve reports.
Uses reportlab for PDF generation.
"""
import logging
from io import BytesIO
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from reportlab.lib import colors
from reportlab.lib.pagesizes import letter
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from app.schemas.certificate import Certificate, ConeMembershipCertificate
from app.schemas.report import SolveReport, SweepRow

logger = logging.getLogger(__name__)

PASS_COLOR = colors.HexColor("#27ae60")
FAIL_COLOR = colors.HexColor("#c0392b")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)):
        return "(" + ", ".join(_fmt(v) for v in value[:8]) + (", ..." if len(value) > 8 else "") + ")"
    return str(value)


class ReportGenerator:
    """
    PDF report for one run of the toolkit.
    """

    def __init__(self, title: str = "Verification Report"):
        self.title = title
        self.styles = getSampleStyleSheet()
        self.title_style = ParagraphStyle(
            "ReportTitle", parent=self.styles["Heading1"], fontSize=20, spaceAfter=20, alignment=1
        )
        self.heading_style = ParagraphStyle(
            "ReportHeading", parent=self.styles["Heading2"], fontSize=14,
            textColor=colors.HexColor("#2c3e50"), spaceBefore=12, spaceAfter=8,
        )
        self.body_style = ParagraphStyle(
            "ReportBody", parent=self.styles["Normal"], fontSize=10, spaceAfter=4
        )

    def _table(self, rows: List[List[str]], widths: Sequence[float], verdict_column: Optional[int] = None) -> Table:
        table = Table(rows, colWidths=[w * inch for w in widths], repeatRows=1)
        style = [
            ("BACKGROUND", (0, 0), (-1, 0), colors.HexColor("#34495e")),
            ("TEXTCOLOR", (0, 0), (-1, 0), colors.whitesmoke),
            ("FONTNAME", (0, 0), (-1, 0), "Helvetica-Bold"),
            ("FONTSIZE", (0, 0), (-1, -1), 8),
            ("GRID", (0, 0), (-1, -1), 0.5, colors.grey),
            ("ROWBACKGROUNDS", (0, 1), (-1, -1), [colors.white, colors.HexColor("#f4f6f7")]),
        ]
        if verdict_column is not None:
            for i, row in enumerate(rows[1:], start=1):
                color = PASS_COLOR if row[verdict_column] == "pass" else FAIL_COLOR
                style.append(("TEXTCOLOR", (verdict_column, i), (verdict_column, i), color))
        table.setStyle(TableStyle(style))
        return table

    def certificate_section(self, certificates: Iterable[Certificate]) -> list:
        certificates = list(certificates)
        story = [Paragraph("Certificates", self.heading_style)]
        rows = [["Condition", "Operator", "Samples", "Margin", "Verdict", "Worst witness"]]
        for cert in certificates:
            rows.append([
                cert.condition.value,
                cert.spec.label if cert.spec else "-",
                str(cert.n_samples),
                _fmt(cert.margin),
                cert.verdict.value,
                _fmt(cert.witnesses[0]) if cert.witnesses else "-",
            ])
        story.append(self._table(rows, [1.4, 1.3, 0.6, 0.9, 0.5, 2.3], verdict_column=4))
        failed = sum(not c.passed for c in certificates)
        story.append(Spacer(1, 0.1 * inch))
        story.append(Paragraph(f"<i>{len(certificates)} certificates, {failed} failed</i>", self.body_style))
        return story

    def cone_section(self, cert: ConeMembershipCertificate) -> list:
        story = [Paragraph("Tangent cone membership", self.heading_style)]
        for name in ("mu", "sigma", "epsilon", "R_used", "theta_estimate", "n_samples", "seed"):
            story.append(Paragraph(f"<b>{name}:</b> {_fmt(getattr(cert, name))}", self.body_style))
        story.append(Paragraph(f"<b>verdict:</b> {cert.verdict.value}", self.body_style))
        return story

    def solve_section(self, report: SolveReport) -> list:
        story = [Paragraph("Dirichlet solve", self.heading_style)]
        fields = [
            "converged", "residual_inf", "error_inf", "max_hess_interior", "max_hess_boundary",
            "max_grad", "c1_ratio", "newton_iterations", "continuation_steps", "linear_iterations", "wall_time",
        ]
        rows = [["Quantity", "Value"]] + [[name, _fmt(getattr(report, name))] for name in fields]
        story.append(self._table(rows, [2.0, 2.0]))
        return story

    def sweep_section(self, rows: Sequence[SweepRow]) -> list:
        story = [Paragraph("Estimate monitor sweep", self.heading_style)]
        table = [["s", "max |D2u| int", "max |D2u| bdry", "max |Du|", "C1 ratio", "residual", "iters"]]
        for row in rows:
            table.append([
                _fmt(row.s), _fmt(row.max_hess_interior), _fmt(row.max_hess_boundary),
                _fmt(row.max_grad), _fmt(row.c1_ratio), _fmt(row.residual), str(row.iters),
            ])
        story.append(self._table(table, [0.5, 1.1, 1.1, 0.9, 0.9, 0.9, 0.5]))
        return story

    def generate_report(
        self,
        certificates: Iterable[Certificate] = (),
        cone: Optional[ConeMembershipCertificate] = None,
        solve: Optional[SolveReport] = None,
        sweep: Sequence[SweepRow] = (),
    ) -> BytesIO:
        """
        Args:
            certificates: Certificates to tabulate
            cone: Optional tangent cone certificate
            solve: Optional solve report
            sweep: Optional sweep rows

        Returns:
            BytesIO: PDF file as bytes
        """
        buffer = BytesIO()
        doc = SimpleDocTemplate(buffer, pagesize=letter, title=self.title)
        story = [Paragraph(self.title, self.title_style), Spacer(1, 0.2 * inch)]
        certificates = list(certificates)
        if certificates:
            story += self.certificate_section(certificates)
        if cone is not None:
            story += self.cone_section(cone)
        if solve is not None:
            story += self.solve_section(solve)
        if sweep:
            story += self.sweep_section(sweep)
        doc.build(story)
        buffer.seek(0)
        return buffer

    def write(self, path, **sections) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.generate_report(**sections).getvalue())
        logger.info(f"wrote PDF report to {path}")
        return path
