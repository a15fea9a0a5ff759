from .http_client import HttpTeacher, HttpTeacherConfig, TeacherHttpError, label_via_http
from .oracle import (
    CoordinationRule,
    Message,
    RuleTable,
    ScriptedTeacher,
    TaskProgress,
    progress_from_state,
)

__all__ = [
    "CoordinationRule",
    "HttpTeacher",
    "HttpTeacherConfig",
    "Message",
    "RuleTable",
    "ScriptedTeacher",
    "TaskProgress",
    "TeacherHttpError",
    "label_via_http",
    "progress_from_state",
]
