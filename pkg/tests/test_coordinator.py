import base64

import pytest

from patent_analogs import coordinator
from patent_analogs.coordinator import (
    AWS,
    BUILTIN_FUNCTIONS,
    ServiceDescriptor,
    ServiceRegistry,
    Status,
    Workstation,
    error_envelope,
)
from patent_analogs.errors import (
    EmptyServiceSet,
    ModelNotInitialized,
    NoPipeline,
    NotExecutable,
    StageError,
    UnknownFunction,
    UnknownServiceId,
)
from patent_analogs.store import DocumentStore
from patent_analogs.vectors import KeyedVectors

from conftest import c7_task

# membership copied from the published function definitions
PUBLISHED = {
    "C_1": "aws_1 aws_3 aws_5 aws_6 aws_8 aws_9 aws_11 aws_12 aws_14 aws_16 aws_20",
    "C_2": "aws_1 aws_9 aws_11 aws_13 aws_15 aws_18 aws_22 aws_24",
    "C_3": "aws_1 aws_9 aws_11 aws_13 aws_15 aws_18 aws_22",
    "C_4": "aws_1 aws_3 aws_5 aws_8 aws_12 aws_20 aws_24",
    "C_5": "aws_21 aws_24",
    "C_6": "aws_1 aws_3 aws_8 aws_14 aws_20 aws_24",
    "C_7": "aws_1 aws_3 aws_21 aws_23 aws_24",
}
MISSING = {
    "C_1": ["aws_6", "aws_14", "aws_16"],
    "C_2": ["aws_15", "aws_18", "aws_22"],
    "C_3": ["aws_15", "aws_18", "aws_22"],
    "C_6": ["aws_14"],
}


class TestRegistry:
    def test_all_services_present(self):
        reg = ServiceRegistry()
        assert len(AWS) == 24 and list(reg.services) == [f"aws_{i}" for i in range(1, 25)]
        local = {s for s, d in reg.services.items() if d.status is Status.LOCAL}
        assert local == {f"aws_{i}" for i in (1, 2, 3, 5, 8, 9, 10, 11, 12, 13, 17, 20, 21, 23, 24)}

    def test_builtin_definitions(self):
        reg = ServiceRegistry()
        assert len(BUILTIN_FUNCTIONS) == 7
        for fid, members in PUBLISHED.items():
            fn = reg.function(fid)
            assert fn.to_json()["services"] == members.split()
            assert fn.services <= set(AWS)
            assert fn.executable == (fid in ("C_4", "C_5", "C_7"))
            assert list(fn.missing) == MISSING.get(fid, [])

    def test_register(self):
        reg = ServiceRegistry()
        reg.register_service("aws_21", ServiceDescriptor(Status.LOCAL))
        assert reg.services["aws_21"].status is Status.LOCAL
        with pytest.raises(UnknownServiceId):
            reg.register_service("aws_99", ServiceDescriptor(Status.LOCAL))
        with pytest.raises(UnknownServiceId):
            reg.register_service("aws_0", ServiceDescriptor(Status.LOCAL))

    def test_reregistration_replaces_and_updates_functions(self):
        reg = ServiceRegistry()
        reg.register_service("aws_3", ServiceDescriptor(Status.UNAVAILABLE, None, "down"))
        assert reg.services["aws_3"] == ServiceDescriptor(Status.UNAVAILABLE, None, "down")
        assert not reg.function("C_7").executable
        assert reg.function("C_7").missing == ("aws_3",)
        reg.register_service("aws_14", ServiceDescriptor(Status.LOCAL, "http://parser"))
        assert reg.function("C_6").missing == ("aws_3",)

    def test_define_function(self):
        reg = ServiceRegistry()
        assert reg.define_function("C_7", {"aws_1", "aws_3", "aws_21", "aws_23", "aws_24"}).executable
        fn = reg.define_function("C_2", PUBLISHED["C_2"].split())
        assert not fn.executable
        with pytest.raises(EmptyServiceSet):
            reg.define_function("mine", set())
        with pytest.raises(UnknownServiceId):
            reg.define_function("mine", {"aws_25"})
        assert reg.define_function("mine", {"aws_21"}).executable
        assert reg.function("mine").services == {"aws_21"}


class TestExecute:
    def test_not_executable(self, store):
        ws = Workstation(store)
        with pytest.raises(NotExecutable) as err:
            ws.execute_function("C_2", {"payload": {}})
        assert err.value.missing == ["aws_15", "aws_18", "aws_22"]
        for fid, missing in MISSING.items():
            with pytest.raises(NotExecutable) as err:
                ws.execute_function(fid, {"payload": {}})
            assert err.value.missing == missing

    def test_unknown(self, store):
        with pytest.raises(UnknownFunction):
            Workstation(store).execute_function("C_9", {"payload": {}})

    def test_user_defined_without_pipeline(self, store):
        ws = Workstation(store)
        ws.registry.define_function("mine", {"aws_21"})
        with pytest.raises(NoPipeline):
            ws.execute_function("mine", {"payload": {}})

    def test_c4_builds_corpus(self, store, two_clusters):
        ws = Workstation(store)
        win = two_clusters[1].text.encode("cp1251")
        docs = [{"id": two_clusters[0].id, "text": two_clusters[0].text},
                {"id": "win", "payload_b64": base64.b64encode(win).decode(), "encoding": "win1251"}]
        out = ws.execute_function("C_4", {"payload": {"documents": docs, "corpus_name": "c"}})
        assert out["status"] == "ok"
        assert {s["service"] for s in out["stages"]} <= BUILTIN_FUNCTIONS["C_4"]
        res = out["result"]
        corpus = ws.load_corpus("c")
        assert res["total_tokens"] == corpus.total_tokens == sum(corpus.vocab_counts.values())
        assert res["sentences"] == len(corpus.sentences) and res["vocab_size"] == len(corpus.vocab_counts)
        assert store.get("texts", "win")["text"] == two_clusters[1].text

    def test_c4_matches_build_corpus(self, store, two_clusters):
        from patent_analogs import clp
        from conftest import as_text
        ws = Workstation(store)
        docs = [{"id": p.id, "text": p.text} for p in two_clusters[:3]]
        ws.execute_function("C_4", {"payload": {"documents": docs}})
        direct = clp.build_corpus([as_text(p.id, p.text) for p in two_clusters[:3]], ws.resources, ws.phrases)
        assert ws.load_corpus("default") == direct

    def test_c4_language_error_names_service(self, store):
        ws = Workstation(store)
        with pytest.raises(StageError) as err:
            ws.execute_function("C_4", {"payload": {"documents": [{"id": "e", "text": "english text"}]}})
        assert err.value.service == "aws_3"
        env = error_envelope(err.value, "x", "C_4")
        assert env["error"]["service"] == "aws_3" and env["error"]["cause"] == "LanguageMismatch"

    def test_c4_unsupported_format_names_service(self, store):
        ws = Workstation(store)
        task = {"payload": {"documents": [{"id": "p", "text": "Їжак", "format": "pdf"}]}}
        with pytest.raises(StageError) as err:
            ws.execute_function("C_4", task)
        assert err.value.service == "aws_1"

    def test_c5_queries(self, store, tmp_path):
        ws = Workstation(store)
        with pytest.raises(StageError) as err:
            ws.execute_function("C_5", {"payload": {"op": "similarity", "a": "x", "b": "y"}})
        assert isinstance(err.value.cause, ModelNotInitialized)
        KeyedVectors(["x", "y", "z"], [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).save(tmp_path / "m.txt")
        out = ws.execute_function("C_5", {"payload": {"op": "similarity", "a": "x", "b": "y",
                                                      "model_path": str(tmp_path / "m.txt")}})
        assert out["result"]["score"] == 0.0
        assert [s["service"] for s in out["stages"]] == ["aws_24", "aws_21"]
        out = ws.execute_function("C_5", {"payload": {"op": "most_similar", "term": "x", "k": 1}})
        assert out["result"]["results"][0]["term"] == "z"
        out = ws.execute_function("C_5", {"payload": {"op": "n_similarity", "set_a": ["x"], "set_b": ["x", "y"]}})
        assert out["result"]["score"] == pytest.approx(2**-0.5)
        out = ws.execute_function("C_5", {"payload": {"op": "cluster_center", "terms": ["x", "y"]}})
        assert out["result"]["center"] == pytest.approx([2**-0.5, 2**-0.5])
        with pytest.raises(StageError) as err:
            ws.execute_function("C_5", {"payload": {"op": "similarity", "a": "x", "b": "nope"}})
        assert err.value.service == "aws_21"

    def test_c7_end_to_end(self, trained_workstation):
        ws, out = trained_workstation
        assert out["status"] == "ok" and out["correlation_id"] == "fixture-7"
        services = [s["service"] for s in out["stages"]]
        assert set(services) <= BUILTIN_FUNCTIONS["C_7"]
        assert set(services) == BUILTIN_FUNCTIONS["C_7"]
        results = out["result"]["search"]["results"]
        assert any(r["verdict"] == "similar" for r in results)
        assert "Заявник: Іваненко І.І." in out["result"]["application"]
        assert results[0]["patent_id"] in out["result"]["application"]
        assert "{{" not in out["result"]["application"]
        assert out["dropped_oov_terms"] == out["result"]["search"]["dropped_oov_terms"]

    def test_c7_missing_template_field(self, trained_workstation, query_text, tmp_path):
        ws, _ = trained_workstation
        other = Workstation(DocumentStore(tmp_path), registry=ws.registry)
        other.set_model(ws.model)
        for pid in ws.store.list("patents"):
            other.store.put("patents", pid, ws.store.get("patents", pid))
        task = {"payload": {"query": {"id": "q", "text": query_text}}}
        with pytest.raises(StageError) as err:
            other.execute_function("C_7", task)
        assert err.value.service == "aws_23"
        assert err.value.cause.names == ["applicant"]
        task["payload"]["fields"] = {"applicant": "ТОВ Винахід"}
        out = other.execute_function("C_7", task)
        assert [s["stage"] for s in out["stages"]][-2:] == ["rank_analogs", "fill_template"]

    def test_stage_outside_function_refused(self):
        run = coordinator._Run(ServiceRegistry().function("C_5"), "x")
        with pytest.raises(RuntimeError):
            with run.stage("aws_1", "extract_text"):
                pass

    def test_malformed_task(self, store):
        from patent_analogs.errors import MalformedInput
        ws = Workstation(store)
        with pytest.raises(MalformedInput):
            ws.execute_function("C_5", {"payload": []})
        with pytest.raises(MalformedInput):
            ws.execute_function("C_7", {"payload": {"k": 1}})
