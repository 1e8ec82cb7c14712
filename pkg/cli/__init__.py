from cli.audit import AuditReport, audit, render_checklist

__all__ = ["AuditReport", "audit", "render_checklist"]
