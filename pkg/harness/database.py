"""
SQLite result store for sweeps (SQLAlchemy).
"""

import json
import logging
import math
import uuid
from datetime import datetime
from typing import List, Optional, Sequence

from sqlalchemy import Column, DateTime, Float, ForeignKey, Index, Integer, String, Text, create_engine
from sqlalchemy.orm import declarative_base, relationship, sessionmaker

from ipc.models import IpcReport
from models import TaskKind
from .models import ResultRecord

logger = logging.getLogger(__name__)

Base = declarative_base()


class SweepRunDB(Base):
    """One stored sweep or experiment."""
    __tablename__ = 'sweep_runs'

    run_id = Column(String, primary_key=True)
    name = Column(String, nullable=False)
    parameter = Column(String, nullable=True)
    config_hash = Column(String, nullable=True)
    config_json = Column(Text, nullable=True)
    created_at = Column(DateTime, default=datetime.utcnow)

    records = relationship("ResultRecordDB", back_populates="run", cascade="all, delete-orphan")


class ResultRecordDB(Base):
    """One (grid point, Hamiltonian) result."""
    __tablename__ = 'result_records'

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(String, ForeignKey('sweep_runs.run_id'), nullable=False)
    parameter = Column(Float, nullable=True)
    seed = Column(String, nullable=False)
    grid_index = Column(Integer, nullable=False)
    ham_index = Column(Integer, nullable=False)
    ipc_1 = Column(Float, nullable=True)
    ipc_2 = Column(Float, nullable=True)
    ipc_3 = Column(Float, nullable=True)
    ipc_4 = Column(Float, nullable=True)
    ipc_5 = Column(Float, nullable=True)
    ipc_6 = Column(Float, nullable=True)
    nrmse_lxx = Column(Float, nullable=True)
    nrmse_lxz = Column(Float, nullable=True)
    nrmse_mg = Column(Float, nullable=True)
    runtime_s = Column(Float, default=0.0)
    config_hash = Column(String, nullable=True)
    ipc_report_json = Column(Text, nullable=True)

    run = relationship("SweepRunDB", back_populates="records")

    __table_args__ = (
        Index('idx_result_records_run_id', 'run_id'),
        Index('idx_result_records_point', 'run_id', 'grid_index', 'ham_index'),
    )


def _nullable(value: float) -> Optional[float]:
    return None if value is None or math.isnan(value) else float(value)


def _nan(value: Optional[float]) -> float:
    return math.nan if value is None else float(value)


class ResultDatabase:
    """Database operations for stored sweeps."""

    def __init__(self, db_url: str = "sqlite:///./qrc_results.db"):
        self.engine = create_engine(db_url, echo=False)
        self.SessionLocal = sessionmaker(bind=self.engine)

    def create_tables(self):
        Base.metadata.create_all(bind=self.engine)
        logger.info("Result database tables created")

    def get_session(self):
        return self.SessionLocal()

    def save_records(
        self,
        records: Sequence[ResultRecord],
        name: str,
        parameter: Optional[str] = None,
        config: Optional[dict] = None,
        run_id: Optional[str] = None,
    ) -> str:
        """Store records under a new (or given) run id; returns the id."""
        run_id = run_id or f"run-{uuid.uuid4().hex[:12]}"
        session = self.get_session()
        try:
            run = SweepRunDB(
                run_id=run_id,
                name=name,
                parameter=parameter,
                config_hash=records[0].config_hash if records else None,
                config_json=json.dumps(config, sort_keys=True) if config is not None else None,
            )
            for record in records:
                run.records.append(ResultRecordDB(
                    parameter=_nullable(record.parameter),
                    seed=str(record.seed),
                    grid_index=record.grid_index,
                    ham_index=record.ham_index,
                    **{f"ipc_{d}": _nullable(v) for d, v in enumerate(record.per_degree, start=1)},
                    **{
                        f"nrmse_{kind.value.lower()}": _nullable(record.nrmse.get(kind.value))
                        for kind in TaskKind
                    },
                    runtime_s=record.runtime_s,
                    config_hash=record.config_hash,
                    ipc_report_json=json.dumps(record.ipc_report.to_dict()) if record.ipc_report else None,
                ))
            session.add(run)
            session.commit()
            logger.info(f"Stored {len(records)} records as {run_id}")
            return run_id
        finally:
            session.close()

    def get_records(self, run_id: str) -> List[ResultRecord]:
        session = self.get_session()
        try:
            rows = (
                session.query(ResultRecordDB)
                .filter_by(run_id=run_id)
                .order_by(ResultRecordDB.grid_index, ResultRecordDB.ham_index)
                .all()
            )
            records = []
            for row in rows:
                nrmse = {}
                for kind in TaskKind:
                    value = getattr(row, f"nrmse_{kind.value.lower()}")
                    if value is not None:
                        nrmse[kind.value] = value
                records.append(ResultRecord(
                    parameter=_nan(row.parameter),
                    seed=int(row.seed),
                    ham_index=row.ham_index,
                    grid_index=row.grid_index,
                    per_degree=tuple(_nan(getattr(row, f"ipc_{d}")) for d in range(1, 7)),
                    nrmse=nrmse,
                    runtime_s=row.runtime_s,
                    config_hash=row.config_hash or "",
                    ipc_report=IpcReport.from_dict(json.loads(row.ipc_report_json)) if row.ipc_report_json else None,
                ))
            return records
        finally:
            session.close()

    def list_sweeps(self, limit: int = 20) -> List[dict]:
        """Most recent runs first."""
        session = self.get_session()
        try:
            runs = session.query(SweepRunDB).order_by(SweepRunDB.created_at.desc()).limit(limit).all()
            return [
                {
                    "run_id": run.run_id,
                    "name": run.name,
                    "parameter": run.parameter,
                    "n_records": len(run.records),
                    "created_at": run.created_at.isoformat() if run.created_at else None,
                }
                for run in runs
            ]
        finally:
            session.close()
