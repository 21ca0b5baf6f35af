"""Pydantic request models for the HTTP service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class MemberIn(BaseModel):
    name: str
    role: str = ""
    seniority: str
    responsibilities: list[str] = Field(default_factory=list)
    id: Optional[str] = None


class SettingsIn(BaseModel):
    selection_criteria: list[str] = Field(default_factory=list)
    performance_constraints: dict[str, float] = Field(default_factory=dict)
    inclusion_rules: list[str] = Field(default_factory=list)


class ExperimentCreate(BaseModel):
    name: str
    research_question: str
    date: str
    team: list[MemberIn]
    settings: Optional[SettingsIn] = None


class IngestRequest(BaseModel):
    dataset: str  # name or id; created on first use when a name
    content_kind: str
    csv_text: Optional[str] = None
    xsac_text: Optional[str] = None
    texts: Optional[list[str]] = None
    license: str = "unspecified"
    source: str = "api upload"
    domain: str = ""
    delimiter: str = ","
    quote: str = '"'
    external_id_column: Optional[str] = None
    media_hash_column: Optional[str] = None


class RunRequest(BaseModel):
    experiment_id: str
    inputs: dict[str, str] = Field(default_factory=dict)


class TagCreate(BaseModel):
    item_id: str
    label: str
    member_id: str
    experiment_id: str


class ValidationCreate(BaseModel):
    target: str
    member_id: str
    verdict: str
    comment: str = ""
    expected_seq: Optional[int] = None
