"""Session engine: flow discipline, passes, revisits, replay, persistence."""

import json

import pytest

from perspecml import catalog as cat, session as ses
from perspecml.analysis import coverage
from perspecml.diagnostics import SessionError
from perspecml.specformat import ConcernEntry, SpecDocument


def decide(relevance="important", spec="text", **kw):
    return ses.Decision(kind="applicable", relevance=relevance, spec_text=spec, **kw)


def walk(catalog, session, decision_for):
    """Submit decision_for(concern) until done; returns (session, prompted ids)."""
    prompted = []
    while True:
        prompt = ses.next_prompt(catalog, session)
        if prompt is None:
            return session, prompted
        prompted.append(prompt.concern.id)
        session = ses.submit_decision(catalog, session, prompt.concern.id, decision_for(prompt.concern.id))


class TestStart:
    def test_fresh_session_starts_at_o1(self, catalog):
        session = ses.start_session(catalog)
        prompt = ses.next_prompt(catalog, session)
        assert prompt.concern.id == "O1"
        assert prompt.perspective.id == "objectives"
        assert prompt.pass_no == 1
        assert len(session.status) == 59

    def test_seeded_objectives_start_at_u1(self, catalog):
        entries = tuple(
            ConcernEntry(concern=cid, applicable=True, relevance="important", spec_text="x")
            for cid in cat.flow_order(catalog)
            if cat.perspective_of(cid) == "objectives"
        )
        seed = SpecDocument(project_name="seeded", entries=entries)
        session = ses.start_session(catalog, seed=seed)
        assert ses.next_prompt(catalog, session).concern.id == "U1"
        assert len(session.entries) == 10

    def test_invalid_seed_rejected(self, catalog):
        seed = SpecDocument(
            project_name="bad",
            entries=(ConcernEntry(concern="M15", applicable=True, relevance="essential"),),
        )
        with pytest.raises(SessionError) as exc:
            ses.start_session(catalog, seed=seed)
        assert exc.value.code == "E-SES-SEED"

    def test_log_starts_with_started_event(self, catalog):
        session = ses.start_session(catalog)
        assert session.log[0].kind == "started"
        assert session.log[0].seq == 1


class TestTraversal:
    def test_pass1_prompts_exactly_flow_order(self, catalog):
        session = ses.start_session(catalog)
        _, prompted = walk(catalog, session, lambda cid: decide())
        assert prompted == cat.flow_order(catalog)

    def test_submit_advances_to_next(self, catalog):
        session = ses.start_session(catalog)
        session = ses.submit_decision(catalog, session, "O1", decide("essential"))
        assert ses.next_prompt(catalog, session).concern.id == "O2"

    def test_out_of_order_submission_rejected(self, catalog):
        session = ses.start_session(catalog)
        with pytest.raises(SessionError) as exc:
            ses.submit_decision(catalog, session, "M3", decide())
        assert exc.value.code == "E-SES-ORDER"

    def test_skip_all_starts_pass_two_at_o1(self, catalog):
        session = ses.start_session(catalog)
        skip = ses.Decision(kind="skip")
        for cid in cat.flow_order(catalog):
            session = ses.submit_decision(catalog, session, cid, skip)
        assert session.pass_no == 2
        assert ses.next_prompt(catalog, session).concern.id == "O1"
        assert list(session.queue) == cat.flow_order(catalog)

    def test_pass_two_only_revisits_skipped(self, catalog):
        session = ses.start_session(catalog)
        flow = cat.flow_order(catalog)
        for cid in flow:
            decision = ses.Decision(kind="skip") if cid.startswith("M") else decide()
            session = ses.submit_decision(catalog, session, cid, decision)
        assert session.pass_no == 2
        assert list(session.queue) == [cid for cid in flow if cid.startswith("M")]

    def test_skip_in_pass_two_ends_session(self, catalog):
        session = ses.start_session(catalog)
        skip = ses.Decision(kind="skip")
        for cid in cat.flow_order(catalog):
            session = ses.submit_decision(catalog, session, cid, skip)
        for cid in cat.flow_order(catalog):
            session = ses.submit_decision(catalog, session, cid, skip)
        assert session.done
        assert ses.next_prompt(catalog, session) is None

    def test_decision_after_done_rejected(self, catalog):
        session = ses.start_session(catalog)
        session, _ = walk(catalog, session, lambda cid: decide())
        with pytest.raises(SessionError) as exc:
            ses.submit_decision(catalog, session, "O1", decide())
        assert exc.value.code == "E-SES-ORDER"

    def test_invalid_decision_rejected_before_logging(self, catalog):
        session = ses.start_session(catalog)
        with pytest.raises(SessionError) as exc:
            ses.submit_decision(catalog, session, "O1", ses.Decision(kind="applicable"))
        assert exc.value.code == "E-SES-DEC"
        assert len(session.log) == 1

    def test_progress_decreases_worklist(self, catalog):
        session = ses.start_session(catalog)
        before = len(session.queue)
        session = ses.submit_decision(catalog, session, "O1", ses.Decision(kind="skip"))
        assert len(session.queue) == before - 1


class TestPrompts:
    def test_prompt_related_statuses(self, catalog):
        session = ses.start_session(catalog)
        for cid in cat.flow_order(catalog):
            if cid == "M11":
                break
            session = ses.submit_decision(
                catalog, session, cid, decide() if cid == "M1" else ses.Decision(kind="skip")
            )
        prompt = ses.next_prompt(catalog, session)
        assert prompt.concern.id == "M11"
        statuses = {rs.related.concern.id: rs.status for rs in prompt.related}
        assert statuses["M1"] == "addressed"
        assert statuses["M5"] == "unaddressed"

    def test_prompt_carries_task_and_roles(self, catalog):
        prompt = ses.next_prompt(catalog, ses.start_session(catalog))
        assert prompt.task.id == "T-OBJ-1"
        assert "RE" in prompt.task.suggested_roles

    def test_prompt_experimental_flag(self, catalog):
        session = ses.start_session(catalog)
        for cid in cat.flow_order(catalog):
            if cid == "M1":
                break
            session = ses.submit_decision(catalog, session, cid, ses.Decision(kind="skip"))
        assert ses.next_prompt(catalog, session).experimental


class TestRevisit:
    def test_revisit_decided_concern(self, catalog):
        session = ses.start_session(catalog)
        session = ses.submit_decision(catalog, session, "O1", decide("essential", "v1"))
        session = ses.revisit(catalog, session, "O1")
        assert ses.next_prompt(catalog, session).concern.id == "O1"

    def test_revisit_then_new_decision_overwrites(self, catalog):
        session = ses.start_session(catalog)
        session = ses.submit_decision(catalog, session, "O1", decide("essential", "v1"))
        session = ses.revisit(catalog, session, "O1")
        session = ses.submit_decision(catalog, session, "O1", decide("desirable", "v2"))
        doc = ses.export_spec(session)
        entry = doc.entry_map()["O1"]
        assert (entry.relevance, entry.spec_text) == ("desirable", "v2")
        assert len([e for e in doc.entries if e.concern == "O1"]) == 1

    def test_revisit_preserves_entry_until_overwritten(self, catalog):
        session = ses.start_session(catalog)
        session = ses.submit_decision(catalog, session, "O1", decide("essential", "v1"))
        session = ses.revisit(catalog, session, "O1")
        assert ses.export_spec(session).entry_map()["O1"].spec_text == "v1"

    def test_traversal_resumes_after_revisit(self, catalog):
        session = ses.start_session(catalog)
        session = ses.submit_decision(catalog, session, "O1", decide())
        session = ses.submit_decision(catalog, session, "O2", decide())
        session = ses.revisit(catalog, session, "O1")
        session = ses.submit_decision(catalog, session, "O1", decide("important"))
        assert ses.next_prompt(catalog, session).concern.id == "O3"

    def test_revisit_unknown_concern(self, catalog):
        session = ses.start_session(catalog)
        with pytest.raises(SessionError) as exc:
            ses.revisit(catalog, session, "Z9")
        assert exc.value.code == "E-SES-REV"

    def test_revisit_pending_concern_rejected(self, catalog):
        session = ses.start_session(catalog)
        with pytest.raises(SessionError) as exc:
            ses.revisit(catalog, session, "M3")
        assert exc.value.code == "E-SES-REV"

    def test_skip_after_revisit_drops_entry(self, catalog):
        session = ses.start_session(catalog)
        session = ses.submit_decision(catalog, session, "O1", decide())
        session = ses.revisit(catalog, session, "O1")
        session = ses.submit_decision(catalog, session, "O1", ses.Decision(kind="skip"))
        assert "O1" not in ses.export_spec(session).entry_map()
        assert session.status_map()["O1"] == ses.SKIPPED


class TestExport:
    def test_fresh_export_is_empty(self, catalog):
        doc = ses.export_spec(ses.start_session(catalog))
        assert doc.entries == ()
        assert coverage(catalog, doc).addressed == 0

    def test_full_session_exports_59(self, catalog):
        session, _ = walk(catalog, ses.start_session(catalog), lambda cid: decide())
        doc = ses.export_spec(session)
        assert coverage(catalog, doc).addressed == 59

    def test_export_reseeds_equivalent_session(self, catalog):
        session = ses.start_session(catalog)
        for cid in ("O1", "O2", "O3"):
            session = ses.submit_decision(catalog, session, cid, decide("essential", f"spec {cid}"))
        doc = ses.export_spec(session)
        reseeded = ses.start_session(catalog, seed=doc)
        assert ses.export_spec(reseeded) == doc
        assert ses.next_prompt(catalog, reseeded).concern.id == "O4"

    def test_export_always_serializes_cleanly(self, catalog):
        from perspecml import analysis, specformat

        session = ses.start_session(catalog)
        for i, cid in enumerate(cat.flow_order(catalog)[:20]):
            kinds = [decide("essential", f"s{i}"), ses.Decision(kind="not_applicable", reason="r"),
                     ses.Decision(kind="skip")]
            session = ses.submit_decision(catalog, session, cid, kinds[i % 3])
            doc = ses.export_spec(session)
            result = specformat.parse_spec(specformat.serialize_spec(doc), catalog)
            assert result.ok
            assert not [f for f in analysis.check(catalog, doc) if f.severity == "error"]


class TestReplay:
    def test_replay_equals_live_state(self, catalog):
        session = ses.start_session(catalog)
        session = ses.submit_decision(catalog, session, "O1", decide("essential", "a"))
        session = ses.submit_decision(catalog, session, "O2", ses.Decision(kind="skip"))
        session = ses.submit_decision(catalog, session, "O3", ses.Decision(kind="not_applicable", reason="no ml"))
        session = ses.revisit(catalog, session, "O1")
        session = ses.submit_decision(catalog, session, "O1", decide("important", "b"))
        replayed = ses.replay(catalog, list(session.log))
        assert replayed == session
        assert json.dumps(replayed.to_state_dict()) == json.dumps(session.to_state_dict())

    def test_replay_with_seed(self, catalog):
        seed = SpecDocument(
            project_name="s",
            entries=(ConcernEntry(concern="O1", applicable=True, relevance="essential", spec_text="x"),),
        )
        session = ses.start_session(catalog, seed=seed)
        session = ses.submit_decision(catalog, session, "O2", decide())
        assert ses.replay(catalog, list(session.log)) == session

    def test_log_is_append_only(self, catalog):
        session = ses.start_session(catalog)
        log_before = session.log
        session2 = ses.submit_decision(catalog, session, "O1", decide())
        assert session2.log[: len(log_before)] == log_before
        assert [e.seq for e in session2.log] == [1, 2]

    def test_sequence_gap_rejected(self, catalog):
        session = ses.start_session(catalog)
        session = ses.submit_decision(catalog, session, "O1", decide())
        events = list(session.log)
        events[1] = ses.Event(seq=5, at=events[1].at, kind=events[1].kind, payload=events[1].payload)
        with pytest.raises(SessionError) as exc:
            ses.replay(catalog, events)
        assert exc.value.code == "E-SES-LOG"


class TestLogFile:
    def test_round_trip_through_file(self, catalog, tmp_path):
        session = ses.start_session(catalog)
        session = ses.submit_decision(catalog, session, "O1", decide("essential", 'tricky "text"\nline'))
        path = ses.log_path(tmp_path, session.id)
        ses.append_events(path, list(session.log))
        loaded = ses.load_session(catalog, path)
        assert loaded == session

    def test_file_name_convention(self, catalog, tmp_path):
        assert str(ses.log_path(tmp_path, "abc")).endswith("abc.psml-log")

    def test_events_are_json_lines_with_rfc3339(self, catalog, tmp_path):
        session = ses.start_session(catalog)
        path = ses.log_path(tmp_path, session.id)
        ses.append_events(path, list(session.log))
        line = path.read_text("utf-8").splitlines()[0]
        event = json.loads(line)
        assert set(event) == {"seq", "at", "kind", "payload"}
        assert "T" in event["at"] and ("+" in event["at"] or event["at"].endswith("Z"))

    def test_corrupt_log_rejected(self, catalog, tmp_path):
        path = tmp_path / "bad.psml-log"
        path.write_text("not json\n", "utf-8")
        with pytest.raises(SessionError) as exc:
            ses.read_log(path)
        assert exc.value.code == "E-SES-LOG"
