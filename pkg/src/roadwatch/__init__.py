"""roadwatch: watchlist-driven vehicle surveillance building blocks.

Plate reading cleanup and matching, face-embedding gallery matching,
IoU tracking with face+plate alert fusion, a deterministic staged
pipeline with an HTTP API, and a detection-metrics engine (precision,
recall, mAP50/mAP50-95, confusion matrix, accuracy).
"""

from .backends import (
    FaceObservation,
    FrameRef,
    OnnxBackend,
    PlateReading,
    StubBackend,
    load_stub_fixture,
)
from .config import PipelineConfig, load_config
from .eventlog import EventLogRecord, read_event_log, write_event_log
from .evaluation import format_summary_row, render_report, run_eval
from .faces import (
    Embedding,
    FaceMatchResult,
    GalleryEntry,
    embedding_distance,
    match_gallery,
)
from .fusion import (
    Alert,
    AlertDebouncer,
    VehicleEvent,
    fuse,
)
from .geometry import BBox, Detection, GroundTruth, iou
from .manifest import ingest, load_manifest
from .metrics import (
    ClassApInput,
    ClassRow,
    ConfusionMatrix,
    MetricsReport,
    accuracy,
    average_precision,
    confusion_matrix,
    evaluate_detections,
    match_detections,
    mean_ap,
    precision_recall,
)
from .pipeline import FrameProcessor, run_pipeline
from .plates import (
    CanonicalPlate,
    ConfusableTable,
    PlateMatchDecision,
    PlateParse,
    PlateWatchEntry,
    canonicalize,
    confusable_distance,
    parse_plate,
    plate_match,
)
from .tracking import Track, VehicleTracker, consensus_plate
from .watchlist import WatchlistStore

__version__ = "0.1.0"
