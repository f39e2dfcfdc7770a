import json
import math

import pytest

import flowguard as fg


def test_softmax_and_activation():
    p = fg.softmax([1.0, 2.0, 3.0])
    assert math.isclose(sum(p), 1.0, abs_tol=1e-12)
    assert fg.leaky_relu(-2.0, 0.0) == 0.0
    assert fg.leaky_relu(-2.0, 0.01) == pytest.approx(-0.02)


def test_train_and_predict_roundtrip(tmp_path):
    data = fg.build_dataset(fg.simulate_csv("all", 40, 3))
    assert len(data) > 100
    assert set(data.labels) == {"normal_traffic", "service_incident", "dos_attack"}
    net = fg.Network.initialize(fg.default_layer_sizes(), 0.01, 1)
    trained, history = fg.train(net, data, epochs=40, seed=1)
    assert len(history) == 40
    loss, accuracy = fg.evaluate(trained, data)
    assert accuracy > 0.9
    path = tmp_path / "model.json"
    trained.save(path)
    loaded = fg.Network.load(path)
    assert loaded == trained
    assert loaded.checksum() == trained.checksum()
    flows = fg.features_from_csv(fg.simulate_csv("dos", 5, 9))
    for _, values in flows:
        assert trained.predict(values) == loaded.predict(values)
        assert max(trained.predict(values), key=trained.predict(values).get) == "dos_attack"


def test_dataset_file_roundtrip(tmp_path):
    data = fg.generate_corpus(20, 4)
    fg.save_dataset(data, tmp_path / "d.dataset")
    back = fg.load_dataset(tmp_path / "d.dataset")
    assert back.serialize() == data.serialize()


def test_suggest_and_report():
    s = fg.suggest([0.0, 0.0, 1.0], 2)
    assert [x["recommendation_id"] for x in s] == ["dos-blacklist", "dos-notify-provider"]
    html = fg.render_report([0.1, 0.2, 0.7], "INC-000001", "2026-01-01T00:00:00Z", [1, 2], "html")
    assert "70.00 %" in html
    with pytest.raises(fg._flowguard.ValidationError):
        fg.render_report([0.1, 0.2, 0.7], "INC-000001", "2026-01-01T00:00:00Z", [], "pdf")


def test_http_api_through_service(tmp_path):
    svc = fg.Service(tmp_path / "ws", epochs=2)
    status, _, body = svc.handle("POST", "/api/flows", fg.simulate_csv("service", 4, 2))
    assert status == 201
    incident = json.loads(body)["incidents"][0]["incident_id"]
    status, _, body = svc.handle("GET", "/api/incidents/" + incident)
    assert status == 200
    status, ctype, body = svc.handle("GET", "/api/reports/" + incident, query={"format": "html"})
    assert status == 200 and ctype.startswith("text/html")
    assert svc.handle("GET", "/api/model")[0] == 200
    assert svc.handle("GET", "/api/unknown")[0] == 404
