import json

import pytest

from figkit.recipes import EmptyData, MissingColumn, load_recipe, read_table


def write_recipe(tmp_path, doc, name="recipe.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def small_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(ValueError):
        load_recipe(write_recipe(tmp_path, {"kind": "pie", "input_csv": ["x.csv"], "x": "a"}))


def test_line_recipe_needs_series(tmp_path):
    with pytest.raises(ValueError):
        load_recipe(write_recipe(tmp_path, {"kind": "line", "input_csv": ["x.csv"], "x": "a"}))


def test_missing_column_fails_fast(tmp_path):
    small_csv(tmp_path, "a,b\n1,2\n")
    recipe = load_recipe(write_recipe(tmp_path, {
        "kind": "line", "input_csv": ["data.csv"], "x": "a", "series": ["nope"]}))
    with pytest.raises(MissingColumn):
        read_table(recipe)


def test_empty_csv_raises(tmp_path):
    small_csv(tmp_path, "a,b\n")
    recipe = load_recipe(write_recipe(tmp_path, {
        "kind": "line", "input_csv": ["data.csv"], "x": "a", "series": ["b"]}))
    with pytest.raises(EmptyData):
        read_table(recipe)


def test_rows_with_empty_cells_dropped(tmp_path):
    small_csv(tmp_path, "a,b,error\n1,2,\n2,,boom\n3,4,\n")
    recipe = load_recipe(write_recipe(tmp_path, {
        "kind": "line", "input_csv": ["data.csv"], "x": "a", "series": ["b"]}))
    table = read_table(recipe)
    assert list(table["a"]) == [1.0, 3.0]


def test_relative_paths_resolve_against_recipe(tmp_path):
    sub = tmp_path / "deep"
    sub.mkdir()
    small_csv(sub, "a,b\n1,2\n", name="data.csv")
    recipe = load_recipe(write_recipe(sub, {
        "kind": "line", "input_csv": ["data.csv"], "x": "a", "series": ["b"]}))
    assert read_table(recipe)["b"][0] == 2.0
