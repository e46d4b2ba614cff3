__all__ = [
    'CLASS_NAMES',
    'REFERENCE_COUNTS',
    'class_index',
    'ManifestEntry',
    'DatasetManifest',
]

import csv
import io
from collections import Counter, OrderedDict

from ..Exceptions import InvalidConfigError, FormatError

CLASS_NAMES = ("Mixed1", "Mixed2", "Ore1", "Ore2", "Ore3", "Agglomerated", "Cylindrical")

REFERENCE_COUNTS = OrderedDict([
    ("Mixed1", 164),
    ("Mixed2", 122),
    ("Ore1", 860),
    ("Ore2", 698),
    ("Ore3", 503),
    ("Agglomerated", 616),
    ("Cylindrical", 45),
])

HEADER = ("id", "class", "reflectance", "depth")


def class_index(name):
    """Returns the fixed index of a class name.

    Raises:
        :class:`depthcontrast.Exceptions.InvalidConfigError`: If the name is not a known class.
    """
    try:
        return CLASS_NAMES.index(name)
    except ValueError:
        raise InvalidConfigError("unknown class {!r}; expected one of {}".format(name, ", ".join(CLASS_NAMES)))


class ManifestEntry(object):
    """

    One sample of a dataset.

    Attributes:
        id (str): The unique sample id (readonly).
        class_name (str): The class name (readonly).
        label (int): The class index (readonly).
        reflectance_path (str): The reflectance plane path, relative to the dataset directory
            (readonly).
        depth_path (str): The depth plane path, relative to the dataset directory (readonly).

    """

    def __init__(self, id, class_name, reflectance_path, depth_path):
        self._id = id
        self._class_name = class_name
        self._label = class_index(class_name)
        self._reflectance_path = reflectance_path
        self._depth_path = depth_path

    def __repr__(self):
        return 'ManifestEntry({!r}, {!r})'.format(self._id, self._class_name)

    def __eq__(self, other):
        return isinstance(other, ManifestEntry) and self.to_row() == other.to_row()

    @property
    def id(self):
        return self._id

    @property
    def class_name(self):
        return self._class_name

    @property
    def label(self):
        return self._label

    @property
    def reflectance_path(self):
        return self._reflectance_path

    @property
    def depth_path(self):
        return self._depth_path

    def to_row(self):
        return (self._id, self._class_name, self._reflectance_path, self._depth_path)


class DatasetManifest(object):
    """

    The inventory of a dataset: one :class:`ManifestEntry` per sample, in file order.

    Attributes:
        entries (list): The entries (readonly).

    Example:
        This example counts the samples of every class in a manifest read from disk::

            from depthcontrast import DepthContrast

            dc = DepthContrast("./data")
            manifest = dc.datasets.read_manifest()
            print(manifest.class_counts())

    """

    def __init__(self, entries):
        """Initializes the DatasetManifest class.

        Parameters:
            entries (list): The :class:`ManifestEntry` objects.

        Raises:
            :class:`depthcontrast.Exceptions.InvalidConfigError`: If two entries share an id.
        """
        self._entries = list(entries)
        self._by_id = OrderedDict()
        for entry in self._entries:
            if entry.id in self._by_id:
                raise InvalidConfigError("duplicate sample id {!r}".format(entry.id))
            self._by_id[entry.id] = entry

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __eq__(self, other):
        return isinstance(other, DatasetManifest) and self._entries == other._entries

    @property
    def entries(self):
        return list(self._entries)

    def ids(self):
        return [entry.id for entry in self._entries]

    def labels(self):
        return [entry.label for entry in self._entries]

    def get(self, id):
        return self._by_id[id]

    def label_of(self, id):
        return self._by_id[id].label

    def class_counts(self):
        """Returns an ordered mapping of every class name to its sample count."""
        counts = Counter(entry.class_name for entry in self._entries)
        return OrderedDict((name, counts.get(name, 0)) for name in CLASS_NAMES)

    def to_text(self):
        """Renders the manifest as comma-separated UTF-8 text with an ``id,class,reflectance,depth``
        header.
        """
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(HEADER)
        for entry in self._entries:
            writer.writerow(entry.to_row())
        return buffer.getvalue()

    @classmethod
    def from_text(cls, text):
        """Parses the text produced by :meth:`to_text`.

        Raises:
            :class:`depthcontrast.Exceptions.FormatError`: If the header or a row is malformed;
                the offset is the line number.
            :class:`depthcontrast.Exceptions.InvalidConfigError`: If a class name is unknown or an
                id repeats.
        """
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(rows[0]) != HEADER:
            raise FormatError("manifest must start with the header " + ",".join(HEADER), 1)
        entries = []
        for number, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != len(HEADER):
                raise FormatError("manifest row needs {} fields".format(len(HEADER)), number)
            entries.append(ManifestEntry(*row))
        return cls(entries)
