__all__ = [
    'Storage',
]

import csv
import io
import json
import logging
import os

from .Datasets.Manifest import DatasetManifest
from .Datasets.Planes import decode_plane, encode_plane
from .Exceptions import CheckpointMismatchError, InvalidPathError
from .Models.Checkpoint import decode_checkpoint, encode_checkpoint
from .Models.Params import ModelParams

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.csv"


class Storage(object):
    """

    This class performs every read and write of the package. Relative paths resolve against the
    root directory; absolute paths are used as given.

    Attributes:
        root (str): The root directory (readonly).

    """

    def __init__(self, root):
        """Initializes the Storage class.

        Parameters:
            root (str): The root directory, usually the data directory.
        """
        assert isinstance(root, str), "`root` is required as a str."
        self._root = root

    def __repr__(self):
        return 'Storage({!r})'.format(self._root)

    @property
    def root(self):
        return self._root

    def resolve(self, path):
        return os.path.join(self._root, path)

    def read_bytes(self, path):
        """Reads a whole file.

        Raises:
            :class:`depthcontrast.Exceptions.InvalidPathError`: If the file cannot be read.
        """
        full = self.resolve(path)
        try:
            with open(full, "rb") as file:
                return file.read()
        except OSError as error:
            raise InvalidPathError("cannot read {}: {}".format(full, error.strerror))

    def write_bytes(self, path, data):
        """Writes a whole file, creating missing directories.

        Raises:
            :class:`depthcontrast.Exceptions.InvalidPathError`: If the file cannot be written.
        """
        full = self.resolve(path)
        try:
            directory = os.path.dirname(full)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(full, "wb") as file:
                file.write(data)
        except OSError as error:
            raise InvalidPathError("cannot write {}: {}".format(full, error.strerror))
        logger.debug("wrote %d bytes to %s", len(data), full)

    def write_plane(self, path, plane):
        self.write_bytes(path, encode_plane(plane))

    def read_plane(self, path):
        return decode_plane(self.read_bytes(path))

    def write_manifest(self, manifest, path=MANIFEST_NAME):
        """Writes a manifest as UTF-8 comma-separated text."""
        assert isinstance(manifest, DatasetManifest), "`manifest` is required as a DatasetManifest."
        self.write_bytes(path, manifest.to_text().encode("utf-8"))

    def read_manifest(self, path=MANIFEST_NAME):
        """Reads a manifest and checks that every plane file it names exists.

        Returns:
            :class:`depthcontrast.Datasets.Manifest.DatasetManifest`: The manifest.

        Raises:
            :class:`depthcontrast.Exceptions.InvalidPathError`: If the manifest or a plane file is
                missing.
            :class:`depthcontrast.Exceptions.FormatError`: If the manifest is malformed.
        """
        manifest = DatasetManifest.from_text(self.read_bytes(path).decode("utf-8"))
        for entry in manifest:
            for plane in (entry.reflectance_path, entry.depth_path):
                if not os.path.isfile(self.resolve(plane)):
                    raise InvalidPathError("manifest names a missing plane file: " + plane)
        return manifest

    def write_checkpoint(self, path, params, width=8, config=None):
        """Writes parameters and their configuration snapshot as a ``DCKP`` checkpoint.

        Parameters:
            path (str): The checkpoint path.
            params (depthcontrast.Models.Params.ModelParams): The parameters.
            width (int, optional): 8 for 64-bit payloads, 4 for 32-bit ones.
            config (depthcontrast.Config.RunConfig, optional): The run configuration; its resolved
                sections and seed are stored under ``config`` and ``run_seed`` in the snapshot.
        """
        assert isinstance(params, ModelParams), "`params` is required as a ModelParams."
        snapshot = params.snapshot()
        if config is not None:
            snapshot["config"] = config.to_dict()
            snapshot["run_seed"] = config.seed
        self.write_bytes(path, encode_checkpoint(snapshot, params.state(), width=width))

    def read_checkpoint(self, path, params=None):
        """Reads a ``DCKP`` checkpoint.

        Parameters:
            path (str): The checkpoint path.
            params (depthcontrast.Models.Params.ModelParams, optional): Parameters whose layout
                the checkpoint must match; the loaded values replace a copy of them.

        Returns:
            :class:`depthcontrast.Models.Params.ModelParams`: The loaded parameters.

        Raises:
            :class:`depthcontrast.Exceptions.FormatError`: If the file is not a checkpoint.
            :class:`depthcontrast.Exceptions.CheckpointMismatchError`: If a tensor is missing or
                differs in shape; the error names the tensor.
        """
        snapshot, tensors = decode_checkpoint(self.read_bytes(path))
        if params is None:
            return ModelParams.from_snapshot(snapshot, tensors)
        loaded = params.copy()
        loaded.load(tensors)
        extra = [name for name in tensors if name not in loaded.tensors and name not in loaded.buffers]
        if extra:
            raise CheckpointMismatchError("checkpoint holds a tensor the configuration lacks", extra[0])
        return loaded

    def write_table(self, path, header, rows, provenance=None, footer=None):
        """Writes comma-separated rows, preceded by a ``# config:`` provenance line.

        Parameters:
            path (str): The output path.
            header (list): The column names.
            rows (list): The rows.
            provenance (str, optional): The resolved configuration as JSON.
            footer (dict, optional): Written as a final ``# summary:`` JSON line.
        """
        buffer = io.StringIO()
        if provenance is not None:
            buffer.write("# config: " + provenance + "\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        if footer is not None:
            buffer.write("# summary: " + json.dumps(footer, sort_keys=True) + "\n")
        self.write_bytes(path, buffer.getvalue().encode("utf-8"))

    def write_report(self, path, report, provenance=None):
        """Writes a per-class report with a macro row; see
        :meth:`depthcontrast.Metrics.MetricsReport.to_rows`.
        """
        self.write_table(path, report.header(), report.to_rows(), provenance)

    def write_aggregate(self, path, report, provenance=None):
        """Writes an aggregated report: mean and population standard deviation columns."""
        assert report.std is not None, "`report` is required as an aggregate."
        self.write_table(path, report.header(), report.to_rows(), provenance,
            footer={"folds": len(report.folds), "std": "population"})

    def write_run_record(self, path, record, provenance=None):
        """Writes one ``epoch,loss,val_macro_f1`` row per epoch and a summary line."""
        self.write_table(path, ["epoch", "loss", "val_macro_f1"], record.epoch_rows(), provenance,
            footer=record.summary())
