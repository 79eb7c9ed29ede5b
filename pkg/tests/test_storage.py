import numpy as np
import pandas as pd
import pytest

from target_actor_critic.storage import ResultStore, content_hash, document_hash, load_document


def test_store_refuses_paths_outside_its_directory(tmp_path):
    store = ResultStore(tmp_path / "out")
    with pytest.raises(ValueError, match="Refusing to write outside"):
        store.save_data({"a": 1}, "../escape.json")
    assert not (tmp_path / "escape.json").exists()


def test_store_rejects_unknown_file_type(tmp_path):
    with pytest.raises(ValueError, match="Unsupported file type"):
        ResultStore(tmp_path).save_data({"a": 1}, "table.parquet")


def test_csv_floats_survive_round_trip(tmp_path):
    values = np.array([0.1, 1 / 3, np.pi * 1e-300, 2.0**-1074, 1e308])
    path = ResultStore(tmp_path).save_data(pd.DataFrame({"x": values}), "values.csv")

    loaded = pd.read_csv(path, float_precision="round_trip")

    assert np.array_equal(loaded["x"].to_numpy(), values)


def test_same_frame_gives_same_bytes(tmp_path):
    frame = pd.DataFrame({"t": [0, 1], "J": [0.25, 1 / 7]})
    store = ResultStore(tmp_path)
    first = store.save_data(frame, "a.csv")
    second = store.save_data(frame.copy(), "nested/b.csv")
    assert content_hash(first) == content_hash(second)


def test_json_and_yaml_documents_load_back(tmp_path):
    store = ResultStore(tmp_path)
    document = {"kernel": [[1.0, 0.0]], "name": "x"}
    assert load_document(store.save_data(document, "doc.json")) == document
    assert load_document(store.save_data(document, "doc.yaml")) == document


def test_non_mapping_document_is_refused(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ValueError, match="must hold a mapping"):
        load_document(path)


def test_hashes():
    assert content_hash(b"") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
    assert document_hash({"a": 1, "b": 2}) == document_hash({"b": 2, "a": 1})
    assert document_hash({"a": 1}) != document_hash({"a": 2})
