import copy
import random

import pytest

from mcms import model
from mcms.model import (AssetRef, Image, IssueCode, PageNode, Project, Text,
                        Theme, add_page, flatten_pages, move_page,
                        reorder_content, validate_project)

from oracles import preorder_pages
from conftest import random_project, write_asset_pool


def codes(report):
    return [issue.code for issue in report.errors]


def empty_project(asset_dir, pages=None):
    return Project(app_id="app", version=1, title="t", languages=["en"],
                   category="c", theme=Theme(), root_pages=pages or [],
                   asset_dir=asset_dir)


class TestValidate:
    def test_no_pages(self, asset_dir):
        report = validate_project(empty_project(asset_dir))
        assert codes(report) == [IssueCode.NO_PAGES]

    def test_missing_asset(self, asset_dir):
        page = PageNode(1, "p", contents=[Image(AssetRef("logo.png", "image/png"))])
        report = validate_project(empty_project(asset_dir, [page]))
        assert IssueCode.MISSING_ASSET in codes(report)
        assert any(i.detail == "logo.png" for i in report.errors)

    def test_every_content_variant_valid(self, simple_project):
        # one page holding each supported variant, all assets present
        assert validate_project(simple_project).errors == []

    def test_duplicate_ids(self, asset_dir):
        pages = [PageNode(1, "a"), PageNode(1, "b")]
        assert IssueCode.DUPLICATE_PAGE_ID in codes(validate_project(empty_project(asset_dir, pages)))

    def test_depth_cap(self, asset_dir):
        leaf = PageNode(70, "leaf")
        node = leaf
        for i in range(69, 0, -1):
            node = PageNode(i, f"n{i}", children=[node])
        report = validate_project(empty_project(asset_dir, [node]))
        assert IssueCode.DEPTH_EXCEEDED in codes(report)

    def test_title_caps(self, asset_dir):
        report = validate_project(empty_project(asset_dir, [PageNode(1, "x" * 257)]))
        assert IssueCode.BAD_TITLE in codes(report)
        report = validate_project(empty_project(asset_dir, [PageNode(1, "")]))
        assert IssueCode.BAD_TITLE in codes(report)

    @pytest.mark.parametrize("item,code", [
        (model.MapPoint(91.0, 0.0), IssueCode.BAD_MAP_POINT),
        (model.MapPoint(0.0, -180.5), IssueCode.BAD_MAP_POINT),
        (model.PhoneNumber("12"), IssueCode.BAD_PHONE),
        (model.PhoneNumber("+123456789012345678"), IssueCode.BAD_PHONE),
        (model.PhoneNumber("555-1234"), IssueCode.BAD_PHONE),
        (model.Email("nope"), IssueCode.BAD_EMAIL),
        (model.Email("a@b@c"), IssueCode.BAD_EMAIL),
        (model.WebLink("ftp://x"), IssueCode.BAD_URL),
    ])
    def test_item_constraints(self, asset_dir, item, code):
        page = PageNode(1, "p", contents=[item])
        assert code in codes(validate_project(empty_project(asset_dir, [page])))

    def test_bad_meta(self, asset_dir):
        p = empty_project(asset_dir, [PageNode(1, "p")])
        p.app_id = "Bad App!"
        p.version = 0
        p.languages = []
        p.theme = Theme(fg_color="red")
        report = validate_project(p)
        for code in (IssueCode.BAD_APP_ID, IssueCode.BAD_VERSION,
                     IssueCode.NO_LANGUAGES, IssueCode.BAD_COLOR):
            assert code in codes(report)

    def test_asset_traversal_refused(self, asset_dir):
        page = PageNode(1, "p", contents=[Image(AssetRef("../evil.png", "image/png"))])
        assert IssueCode.UNSAFE_ASSET_PATH in codes(validate_project(empty_project(asset_dir, [page])))

    def test_pure(self, simple_project):
        assert validate_project(simple_project) == validate_project(simple_project)


class TestAddPage:
    def test_first_insertion(self, asset_dir):
        project, new_id = add_page(empty_project(asset_dir), model.ROOT, "first", 0)
        assert new_id == 1
        assert [p.id for p in project.root_pages] == [1]

    def test_max_plus_one(self, asset_dir):
        pages = [PageNode(1, "a"), PageNode(2, "b", children=[PageNode(5, "c")])]
        project, new_id = add_page(empty_project(asset_dir, pages), 5, "d", 0)
        assert new_id == 6

    def test_unknown_parent(self, asset_dir):
        with pytest.raises(model.UnknownParent):
            add_page(empty_project(asset_dir, [PageNode(1, "a")]), 99, "x", 0)

    def test_position_out_of_range(self, asset_dir):
        with pytest.raises(model.PositionOutOfRange):
            add_page(empty_project(asset_dir, [PageNode(1, "a")]), model.ROOT, "x", 5)

    def test_input_untouched(self, asset_dir):
        original = empty_project(asset_dir, [PageNode(1, "a")])
        snapshot = copy.deepcopy(original)
        add_page(original, model.ROOT, "x", 0)
        assert original == snapshot


class TestMovePage:
    def tree(self, asset_dir):
        return empty_project(asset_dir, [
            PageNode(1, "A", children=[PageNode(2, "B"), PageNode(3, "C", children=[PageNode(4, "D")])]),
        ])

    def test_cycle_refused(self, asset_dir):
        with pytest.raises(model.CycleWouldForm):
            move_page(self.tree(asset_dir), 3, 4, 0)
        with pytest.raises(model.CycleWouldForm):
            move_page(self.tree(asset_dir), 3, 3, 0)

    def test_identity_move(self, asset_dir):
        project = self.tree(asset_dir)
        moved = move_page(project, 2, 1, 0)
        assert moved == project

    def test_reattach_under_sibling(self, asset_dir):
        # A(B, C): moving C under B gives A(B(C)); checked against the
        # pre-order oracle.
        project = empty_project(asset_dir, [
            PageNode(1, "A", children=[PageNode(2, "B"), PageNode(3, "C")]),
        ])
        moved = move_page(project, 3, 2, 0)
        assert [(p.id, parent) for p, parent in preorder_pages(moved)] == \
            [(1, model.ROOT), (2, 1), (3, 2)]

    def test_move_to_root(self, asset_dir):
        moved = move_page(self.tree(asset_dir), 3, model.ROOT, 1)
        assert [p.id for p in moved.root_pages] == [1, 3]

    def test_unknown_page(self, asset_dir):
        with pytest.raises(model.UnknownPage):
            move_page(self.tree(asset_dir), 99, 1, 0)
        with pytest.raises(model.UnknownPage):
            move_page(self.tree(asset_dir), 2, 98, 0)

    def test_inverse_restores(self, asset_dir):
        rng = random.Random(7)
        project = random_project(rng, asset_dir, max_pages=15)
        flat = [(p, parent) for p, parent in preorder_pages(project)]
        for page, parent in flat[1:6]:
            siblings = (project.root_pages if parent == model.ROOT
                        else model.find_page(project, parent).children)
            position = [s.id for s in siblings].index(page.id)
            away = move_page(project, page.id, model.ROOT, len(project.root_pages))
            restored = move_page(away, page.id, parent, position)
            assert restored == project


class TestReorder:
    def test_rotation(self):
        page = PageNode(1, "p", contents=[Text("A"), Text("B"), Text("C")])
        out = reorder_content(page, 2, 0)
        assert [i.body for i in out.contents] == ["C", "A", "B"]

    def test_identity(self):
        page = PageNode(1, "p", contents=[Text("A"), Text("B")])
        assert reorder_content(page, 1, 1).contents == page.contents

    def test_bounds(self):
        page = PageNode(1, "p", contents=[Text("A"), Text("B"), Text("C")])
        with pytest.raises(model.IndexOutOfRange):
            reorder_content(page, 5, 0)

    def test_relative_order_preserved(self):
        rng = random.Random(3)
        for _ in range(50):
            n = rng.randint(1, 8)
            page = PageNode(1, "p", contents=[Text(str(i)) for i in range(n)])
            f, t = rng.randrange(n), rng.randrange(n)
            out = [i.body for i in reorder_content(page, f, t).contents]
            expected = [str(i) for i in range(n)]
            expected.insert(t, expected.pop(f))
            assert out == expected


class TestFlatten:
    def test_fixed_order(self, asset_dir):
        project = empty_project(asset_dir, [
            PageNode(1, "A", contents=[Text("x")],
                     children=[PageNode(2, "B", contents=[Text("x")]),
                               PageNode(3, "C", contents=[Text("x")])]),
            PageNode(4, "D", contents=[Text("x")]),
        ])
        flat = flatten_pages(project)
        assert [(f.page.id, f.parent_id, f.preorder_index) for f in flat] == \
            [(1, model.ROOT, 0), (2, 1, 1), (3, 1, 2), (4, model.ROOT, 3)]

    def test_single_page(self, asset_dir):
        flat = flatten_pages(empty_project(asset_dir, [PageNode(1, "only", contents=[Text("x")])]))
        assert len(flat) == 1 and flat[0].parent_id == model.ROOT and flat[0].preorder_index == 0

    def test_against_recursive_oracle(self, tmp_path):
        write_asset_pool(tmp_path / "a")
        for seed in range(10):
            rng = random.Random(seed)
            project = random_project(rng, tmp_path / "a", max_pages=50)
            flat = flatten_pages(project)
            expected = preorder_pages(project)
            assert [(f.page.id, f.parent_id) for f in flat] == \
                [(p.id, parent) for p, parent in expected]
            assert [f.preorder_index for f in flat] == list(range(len(expected)))

    def test_parent_appears_earlier(self, tmp_path):
        write_asset_pool(tmp_path / "a")
        project = random_project(random.Random(11), tmp_path / "a", max_pages=40)
        flat = flatten_pages(project)
        seen = set()
        for f in flat:
            assert f.parent_id == model.ROOT or f.parent_id in seen
            seen.add(f.page.id)

    def test_invalid_project_refused(self, asset_dir):
        with pytest.raises(model.InvalidProject):
            flatten_pages(empty_project(asset_dir))


def test_ids_only_grow_and_never_duplicate(asset_dir):
    # Only add_page mints ids (always fresh relative to the current tree);
    # after any edit sequence the id set stays duplicate-free.
    rng = random.Random(20)
    project = empty_project(asset_dir, [PageNode(1, "root", contents=[Text("x")])])
    for _ in range(60):
        ids = [p.id for p, _ in preorder_pages(project)]
        op = rng.choice(["add", "move", "delete"])
        if op == "add":
            parent = rng.choice([model.ROOT] + ids)
            siblings = (project.root_pages if parent == model.ROOT
                        else model.find_page(project, parent).children)
            project, new_id = add_page(project, parent, "p", rng.randint(0, len(siblings)))
            assert new_id not in ids
            assert new_id == max(ids, default=0) + 1
        elif op == "move" and len(ids) > 1:
            page_id = rng.choice(ids)
            try:
                project = move_page(project, page_id, model.ROOT, 0)
            except model.CycleWouldForm:
                pass
        elif op == "delete" and len(ids) > 1:
            victim = rng.choice(ids)
            try:
                project = model.delete_page(project, victim)
            except model.InvalidProject:
                pass
        if op != "add":
            assert {p.id for p, _ in preorder_pages(project)} <= set(ids)
        new_ids = [p.id for p, _ in preorder_pages(project)]
        assert len(new_ids) == len(set(new_ids))
