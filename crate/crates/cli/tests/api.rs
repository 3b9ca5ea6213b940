use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use decodoku_cli::server::{router, AppState, Created, StateSnapshot, Suggestion, WireMove, WireTarget};
use decodoku_core::savefile::SaveDocument;
use decodoku_core::Plaquette;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    router(Arc::new(AppState::new(None)))
}

async fn send(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, String) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header(header::CONTENT_TYPE, "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn create(app: &Router, cfg: Value) -> Created {
    let (status, body) = send(app, "POST", "/games", Some(cfg)).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    serde_json::from_str(&body).unwrap()
}

fn mv(from: (usize, usize), to: (usize, usize)) -> Value {
    json!({"from": {"row": from.0, "col": from.1}, "to": {"row": to.0, "col": to.1}})
}

/// Any in-grid neighbour of the first defect.
fn some_move(s: &StateSnapshot) -> Value {
    let d = &s.defects[0];
    let to = if d.col + 1 < s.width {
        (d.row, d.col + 1)
    } else {
        (d.row, d.col - 1)
    };
    mv((d.row, d.col), to)
}

/// A puzzle whose opening board is exactly two adjacent defects.
async fn two_adjacent_defects(app: &Router) -> Created {
    for seed in 0..500 {
        let c = create(
            app,
            json!({"mode": "puzzle", "p": 0.03, "width": 4, "height": 4, "seed": seed}),
        )
        .await;
        let ds = &c.snapshot.defects;
        if ds.len() == 2 {
            let a = Plaquette::new(ds[0].row, ds[0].col);
            let b = Plaquette::new(ds[1].row, ds[1].col);
            if a.manhattan(b) == 1 {
                return c;
            }
        }
    }
    panic!("no seed produced two adjacent defects");
}

#[tokio::test]
async fn empty_puzzle_has_no_defects() {
    let app = app();
    let c = create(&app, json!({"mode": "puzzle", "p": 0})).await;
    assert!(c.snapshot.defects.is_empty());
    assert_eq!(c.snapshot.id, c.id);
    assert_eq!((c.snapshot.width, c.snapshot.height, c.snapshot.d), (8, 8, 10));
    assert_eq!(c.snapshot.score, 0);

    let raw: Value =
        serde_json::from_str(&send(&app, "GET", &format!("/games/{}", c.id), None).await.1).unwrap();
    assert_eq!(raw["status"], "running");
    assert_eq!(raw["mode"], "puzzle");
    for key in ["id", "width", "height", "d", "defects", "score", "moves_made"] {
        assert!(raw.get(key).is_some(), "snapshot lacks `{key}`");
    }
}

#[tokio::test]
async fn same_seed_gives_same_opening_under_distinct_ids() {
    let app = app();
    let a = create(&app, json!({"mode": "dynamic", "seed": 5})).await;
    let b = create(&app, json!({"mode": "dynamic", "seed": 5})).await;
    assert_ne!(a.id, b.id);
    assert_eq!(a.snapshot.defects, b.snapshot.defects);
    assert!(!a.snapshot.defects.is_empty());
}

#[tokio::test]
async fn invalid_configs_are_bad_requests() {
    let app = app();
    for cfg in [
        json!({"d": 1}),
        json!({"width": 1}),
        json!({"p": 1.5}),
        json!({"spawn_period": 0}),
        json!({"mode": "arcade"}),
        json!({"colour": "blue"}),
    ] {
        let (status, body) = send(&app, "POST", "/games", Some(cfg.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{cfg} -> {body}");
    }
}

#[tokio::test]
async fn merging_move_reduces_defects() {
    let app = app();
    let c = two_adjacent_defects(&app).await;
    let ds = &c.snapshot.defects;
    assert_eq!(ds[0].cluster, ds[1].cluster);
    let (status, body) = send(
        &app,
        "POST",
        &format!("/games/{}/moves", c.id),
        Some(mv((ds[0].row, ds[0].col), (ds[1].row, ds[1].col))),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let after: StateSnapshot = serde_json::from_str(&body).unwrap();
    assert!(after.defects.len() < 2);
    assert_eq!(after.moves_made, 1);
    assert_eq!(after.score, 1);
}

#[tokio::test]
async fn illegal_moves_are_unprocessable_with_reason() {
    let app = app();
    let c = create(&app, json!({"mode": "puzzle", "p": 0})).await;
    let uri = format!("/games/{}/moves", c.id);
    let (status, body) = send(&app, "POST", &uri, Some(mv((0, 0), (0, 1)))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body.contains("empty source"), "{body}");

    let c = two_adjacent_defects(&app).await;
    let d = &c.snapshot.defects[0];
    let far = ((d.row + 2) % 4, d.col);
    let (status, body) = send(
        &app,
        "POST",
        &format!("/games/{}/moves", c.id),
        Some(mv((d.row, d.col), far)),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body.contains("non-adjacent target"), "{body}");

    // A push needs an edge column.
    let (status, _) = send(
        &app,
        "POST",
        &format!("/games/{}/moves", c.id),
        Some(json!({"from": {"row": 1, "col": 1}, "to": "OFF:left"})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let (status, _) = send(&app, "POST", &uri, Some(json!({"from": "nowhere"}))).await;
    assert!(status.is_client_error());
}

#[tokio::test]
async fn unknown_ids_are_not_found() {
    let app = app();
    for (method, uri, body) in [
        ("GET", "/games/999", None),
        ("POST", "/games/999/moves", Some(mv((0, 0), (0, 1)))),
        ("GET", "/games/999/suggestion", None),
        ("GET", "/games/999/savefile", None),
        ("POST", "/games/999/annotations", Some(json!({"text": "hi"}))),
    ] {
        let (status, _) = send(&app, method, uri, body).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{method} {uri}");
    }
}

#[tokio::test]
async fn suggestion_merges_an_annihilating_pair() {
    let app = app();
    let c = two_adjacent_defects(&app).await;
    let (status, body) = send(&app, "GET", &format!("/games/{}/suggestion", c.id), None).await;
    assert_eq!(status, StatusCode::OK);
    let raw: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(raw["rationale"]["annihilates"], true);
    let s: Suggestion = serde_json::from_str(&body).unwrap();
    let ds = &c.snapshot.defects;
    let ends = [
        Plaquette::new(ds[0].row, ds[0].col),
        Plaquette::new(ds[1].row, ds[1].col),
    ];
    assert!(ends.contains(&s.mv.from));
    match s.mv.to {
        WireTarget::Plaquette(p) => assert!(ends.contains(&p) && p != s.mv.from),
        other => panic!("unexpected target {other:?}"),
    }
    // Looking never changes anything.
    let (_, again) = send(&app, "GET", &format!("/games/{}", c.id), None).await;
    assert_eq!(serde_json::from_str::<StateSnapshot>(&again).unwrap(), c.snapshot);
}

#[tokio::test]
async fn suggestion_on_empty_board_is_no_content() {
    let app = app();
    let c = create(&app, json!({"mode": "puzzle", "p": 0})).await;
    let (status, body) = send(&app, "GET", &format!("/games/{}/suggestion", c.id), None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    assert!(body.is_empty());
}

#[tokio::test]
async fn fresh_game_savefile_is_header_and_footer() {
    let app = app();
    let c = create(&app, json!({"mode": "puzzle", "p": 0, "seed": 12345})).await;
    let (status, text) = send(&app, "GET", &format!("/games/{}/savefile", c.id), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        text,
        "DECODOKU-SAVE v1\n\
         variant=Z10 grid=8x8 d=10 seed=12345 mode=puzzle spawn_period=1 p=0.0\n\
         END score=0 status=running\n"
    );
}

#[tokio::test]
async fn annotations_appear_in_the_savefile_at_their_tick() {
    let app = app();
    let c = two_adjacent_defects(&app).await;
    let ds = &c.snapshot.defects;
    send(
        &app,
        "POST",
        &format!("/games/{}/moves", c.id),
        Some(mv((ds[0].row, ds[0].col), (ds[1].row, ds[1].col))),
    )
    .await;
    let (status, body) = send(
        &app,
        "POST",
        &format!("/games/{}/annotations", c.id),
        Some(json!({"text": "cleared top cluster"})),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(serde_json::from_str::<Value>(&body).unwrap()["tick"], 1);

    let (status, _) = send(
        &app,
        "POST",
        &format!("/games/{}/annotations", c.id),
        Some(json!({"text": "  "})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let (_, text) = send(&app, "GET", &format!("/games/{}/savefile", c.id), None).await;
    let lines: Vec<&str> = text.lines().collect();
    let m = lines.iter().position(|l| l.starts_with("M ")).unwrap();
    assert_eq!(lines[m + 1], "# cleared top cluster");
}

/// Plays a tiny dynamic game until the board overflows.
async fn finished_game(app: &Router) -> (u64, StateSnapshot) {
    let c = create(
        app,
        json!({"mode": "dynamic", "width": 2, "height": 2, "seed": 3, "warmup": 12}),
    )
    .await;
    let mut snap = c.snapshot;
    for _ in 0..200 {
        if snap.status == decodoku_core::Status::Over {
            return (c.id, snap);
        }
        let (status, body) = send(
            app,
            "POST",
            &format!("/games/{}/moves", c.id),
            Some(some_move(&snap)),
        )
        .await;
        assert_eq!(status, StatusCode::OK, "{body}");
        snap = serde_json::from_str(&body).unwrap();
    }
    panic!("game never ended");
}

#[tokio::test]
async fn moves_after_game_over_conflict() {
    let app = app();
    let (id, snap) = finished_game(&app).await;
    assert_eq!(snap.score, snap.moves_made);
    let (status, body) = send(
        &app,
        "POST",
        &format!("/games/{id}/moves"),
        Some(some_move(&snap)),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT, "{body}");
    let (status, _) = send(&app, "GET", &format!("/games/{id}/suggestion"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn finished_game_savefile_replays_to_final_snapshot() {
    let app = app();
    let (id, snap) = finished_game(&app).await;
    let (_, text) = send(&app, "GET", &format!("/games/{id}/savefile"), None).await;
    assert!(text.ends_with(&format!("END score={} status=over\n", snap.score)));
    let replayed = SaveDocument::parse(&text).unwrap().replay().unwrap();
    assert_eq!(StateSnapshot::of(id, &replayed), snap);
}

#[tokio::test]
async fn finished_games_are_written_through_to_disk() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(AppState::new(Some(dir.path().to_path_buf()))));
    let (id, _) = finished_game(&app).await;
    let on_disk = std::fs::read_to_string(dir.path().join(format!("game-{id}.save"))).unwrap();
    let (_, served) = send(&app, "GET", &format!("/games/{id}/savefile"), None).await;
    assert_eq!(on_disk, served);
}

#[tokio::test]
async fn boundary_push_over_the_wire() {
    let app = app();
    let m: WireMove =
        serde_json::from_value(json!({"from": {"row": 3, "col": 0}, "to": "OFF:left"})).unwrap();
    assert_eq!(serde_json::to_value(m).unwrap()["to"], "OFF:left");
    // Find a puzzle with a defect in column 0 and push it off.
    for seed in 0..200 {
        let c = create(&app, json!({"mode": "puzzle", "p": 0.05, "seed": seed})).await;
        if let Some(d) = c.snapshot.defects.iter().find(|d| d.col == 0) {
            let body = json!({"from": {"row": d.row, "col": 0}, "to": "OFF:left"});
            let (status, resp) = send(&app, "POST", &format!("/games/{}/moves", c.id), Some(body)).await;
            assert_eq!(status, StatusCode::OK, "{resp}");
            let after: StateSnapshot = serde_json::from_str(&resp).unwrap();
            assert_eq!(after.defects.len(), c.snapshot.defects.len() - 1);
            assert!(!after.defects.iter().any(|x| (x.row, x.col) == (d.row, 0)));
            let (_, text) = send(&app, "GET", &format!("/games/{}/savefile", c.id), None).await;
            assert!(text.contains(&format!("B {},0 -> OFF:left", d.row)), "{text}");
            return;
        }
    }
    panic!("no defect in column 0");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_moves_on_one_game_are_linearised() {
    let app = app();
    let c = create(&app, json!({"mode": "puzzle", "p": 0.2, "seed": 8})).await;
    let start = c.snapshot.clone();
    let mut tasks = Vec::new();
    for i in 0..32 {
        let app = app.clone();
        let d = start.defects[i % start.defects.len()].clone();
        let to = if d.row + 1 < start.height {
            (d.row + 1, d.col)
        } else {
            (d.row - 1, d.col)
        };
        let uri = format!("/games/{}/moves", c.id);
        tasks.push(tokio::spawn(async move {
            send(&app, "POST", &uri, Some(mv((d.row, d.col), to))).await
        }));
    }
    let mut accepted = 0;
    for t in tasks {
        let (status, body) = t.await.unwrap();
        match status {
            StatusCode::OK => accepted += 1,
            StatusCode::UNPROCESSABLE_ENTITY => {}
            other => panic!("unexpected {other}: {body}"),
        }
    }
    let (_, body) = send(&app, "GET", &format!("/games/{}", c.id), None).await;
    let end: StateSnapshot = serde_json::from_str(&body).unwrap();
    assert_eq!(end.moves_made, accepted);
    // The save file is a consistent record of exactly the accepted moves.
    let (_, text) = send(&app, "GET", &format!("/games/{}/savefile", c.id), None).await;
    let replayed = SaveDocument::parse(&text).unwrap().replay().unwrap();
    assert_eq!(StateSnapshot::of(c.id, &replayed), end);
}
