import pytest

from depthcontrast.Datasets import CLASS_NAMES, DatasetManifest, ManifestEntry, class_index
from depthcontrast.Exceptions import FormatError, InvalidConfigError

def entry(id, class_name):
    return ManifestEntry(id, class_name, "planes/{}.reflectance.dpc".format(id), "planes/{}.depth.dpc".format(id))

def test_class_indices():
    assert [class_index(name) for name in CLASS_NAMES] == list(range(7))
    assert CLASS_NAMES[4] == "Ore3"
    with pytest.raises(InvalidConfigError):
        class_index("Ore4")

def test_text_round_trip():
    manifest = DatasetManifest([entry("a", "Ore1"), entry("b", "Cylindrical"), entry("c", "Ore1")])
    text = manifest.to_text()
    assert text.splitlines()[0] == "id,class,reflectance,depth"
    parsed = DatasetManifest.from_text(text)
    assert parsed == manifest
    assert parsed.ids() == ["a", "b", "c"]
    assert parsed.labels() == [2, 6, 2]
    assert parsed.label_of("b") == 6
    assert parsed.class_counts()["Ore1"] == 2
    assert parsed.class_counts()["Mixed1"] == 0

def test_duplicate_ids():
    with pytest.raises(InvalidConfigError):
        DatasetManifest([entry("a", "Ore1"), entry("a", "Ore2")])

def test_bad_header():
    with pytest.raises(FormatError) as err_wrapper:
        DatasetManifest.from_text("name,class\n")
    assert err_wrapper.value.offset == 1

def test_short_row():
    with pytest.raises(FormatError) as err_wrapper:
        DatasetManifest.from_text("id,class,reflectance,depth\na,Ore1,r.dpc,d.dpc\nb,Ore2\n")
    assert err_wrapper.value.offset == 3
