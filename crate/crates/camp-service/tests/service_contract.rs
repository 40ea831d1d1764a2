//! End-to-end service behavior against mock upstreams: the chat contract,
//! session isolation, TTL eviction, and a scan proving the service layer
//! leaks no raw PII through bodies, risk exports, or logs.

use std::io::Write;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use camp_core::{EchoUpstream, MockUpstream, UpstreamClient};
use axum::Router as AxumRouter;
use camp_service::{AppState, ChatMeta, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

static LOG_BUFFER: OnceLock<Arc<Mutex<Vec<u8>>>> = OnceLock::new();

#[derive(Clone)]
struct BufferWriter(Arc<Mutex<Vec<u8>>>);

impl Write for BufferWriter {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

impl<'a> tracing_subscriber::fmt::MakeWriter<'a> for BufferWriter {
    type Writer = BufferWriter;

    fn make_writer(&'a self) -> Self::Writer {
        self.clone()
    }
}

fn install_log_capture() -> Arc<Mutex<Vec<u8>>> {
    let buffer = LOG_BUFFER
        .get_or_init(|| {
            let buffer = Arc::new(Mutex::new(Vec::new()));
            let _ = tracing_subscriber::fmt()
                .with_max_level(tracing::Level::TRACE)
                .with_writer(BufferWriter(buffer.clone()))
                .with_ansi(false)
                .try_init();
            buffer
        })
        .clone();
    buffer
}

fn app(config: ServiceConfig, upstream: Arc<dyn UpstreamClient>) -> AxumRouter {
    let state = AppState::new(config, upstream).expect("state builds");
    camp_service::router(state)
}

async fn post_chat(app: &AxumRouter, session_id: Option<&str>, message: &str) -> (StatusCode, Value) {
    let mut payload = json!({ "message": message });
    if let Some(id) = session_id {
        payload["session_id"] = json!(id);
    }
    let request = Request::post("/v1/chat")
        .header("content-type", "application/json")
        .body(Body::from(payload.to_string()))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = axum::body::to_bytes(response.into_body(), usize::MAX).await.unwrap();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

async fn get_json(app: &AxumRouter, path: &str) -> (StatusCode, Value) {
    let request = Request::get(path).body(Body::empty()).unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = axum::body::to_bytes(response.into_body(), usize::MAX).await.unwrap();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

fn meta_of(body: &Value) -> ChatMeta {
    serde_json::from_value(body["meta"].clone()).expect("meta present")
}

#[tokio::test]
async fn healthz_is_alive() {
    let app = app(ServiceConfig::default(), Arc::new(MockUpstream::scripted(vec![])));
    let response = app
        .oneshot(Request::get("/healthz").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(response.status(), StatusCode::OK);
}

#[tokio::test]
async fn full_scenario_triggers_at_turn_four_and_leaks_nothing() {
    let logs = install_log_capture();
    let spec = camp_harness::fixtures::s1();
    // Neutral scripted responses: the upstream never echoes user content,
    // so every body this service emits must be PII-free.
    let responses: Vec<String> =
        (1..=spec.turns.len()).map(|i| format!("Acknowledged item {i}.")).collect();
    let app = app(ServiceConfig::default(), Arc::new(MockUpstream::scripted(responses)));

    let mut session_id: Option<String> = None;
    let mut bodies = Vec::new();
    let mut trigger_seen_at = None;
    for (i, turn) in spec.turns.iter().enumerate() {
        let (status, body) = post_chat(&app, session_id.as_deref(), &turn.text).await;
        assert_eq!(status, StatusCode::OK, "turn {}", i + 1);
        let meta = meta_of(&body);
        if meta.triggered && trigger_seen_at.is_none() {
            trigger_seen_at = Some(i + 1);
            assert_eq!(meta.trigger_turn, Some(i + 1));
        }
        session_id = Some(body["session_id"].as_str().unwrap().to_string());
        bodies.push(body);
    }
    assert_eq!(trigger_seen_at, Some(4), "S1 triggers on the fourth turn at tau=2.0");

    let id = session_id.unwrap();
    let (status, risk) = get_json(&app, &format!("/v1/session/{id}/risk")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(risk["graph"]["triggered"], json!(true));
    assert!(risk["registry"]["entities"].as_array().unwrap().len() >= 5);

    // Scan every emitted body, the risk export, and captured logs for all
    // annotated surfaces; none may appear.
    let mut emitted = bodies.iter().map(|b| b.to_string()).collect::<Vec<_>>();
    emitted.push(risk.to_string());
    emitted.push(String::from_utf8_lossy(&logs.lock().unwrap()).to_string());
    for turn in &spec.turns {
        for annotation in &turn.entities {
            for doc in &emitted {
                assert!(
                    !doc.contains(&annotation.surface),
                    "raw value {:?} leaked into service output",
                    annotation.surface
                );
            }
        }
    }
}

#[tokio::test]
async fn demasking_restores_real_values_for_the_caller_only() {
    let app = app(ServiceConfig::default(), Arc::new(EchoUpstream));
    let turns = [
        "hi, my name is Jane Calloway",
        "I live in Portland these days",
        "my salary is $95,000 a year",
    ];
    let mut session_id: Option<String> = None;
    let mut last = Value::Null;
    for turn in turns {
        let (status, body) = post_chat(&app, session_id.as_deref(), turn).await;
        assert_eq!(status, StatusCode::OK);
        session_id = Some(body["session_id"].as_str().unwrap().to_string());
        last = body;
    }
    let meta = meta_of(&last);
    assert!(meta.triggered);
    // The caller sees their own text de-masked; the meta carries none of it.
    assert_eq!(last["response"], json!("Noted: my salary is $95,000 a year"));
    assert!(!last["meta"].to_string().contains("95,000"));

    // The risk export for the same session carries types, not values.
    let id = session_id.unwrap();
    let (_, risk) = get_json(&app, &format!("/v1/session/{id}/risk")).await;
    let doc = risk.to_string();
    for value in ["Jane Calloway", "Portland", "$95,000"] {
        assert!(!doc.contains(value));
    }
    assert!(doc.contains("PERSON"));

    // Three types in session: complete graph, every amplifier 1 + 0.3*2.
    let nodes = risk["graph"]["nodes"].as_array().unwrap();
    assert_eq!(nodes.len(), 3);
    assert_eq!(risk["graph"]["edges"].as_array().unwrap().len(), 3);
    for node in nodes {
        assert!((node["amplifier"].as_f64().unwrap() - 1.6).abs() < 1e-9);
    }
}

#[tokio::test]
async fn interleaved_sessions_stay_isolated() {
    let app = app(ServiceConfig::default(), Arc::new(MockUpstream::scripted(vec![])));
    let s1 = camp_harness::fixtures::s1();
    let s2 = camp_harness::fixtures::s2();

    let (_, first_a) = post_chat(&app, None, &s1.turns[0].text).await;
    let (_, first_b) = post_chat(&app, None, &s2.turns[0].text).await;
    let id_a = first_a["session_id"].as_str().unwrap().to_string();
    let id_b = first_b["session_id"].as_str().unwrap().to_string();
    assert_ne!(id_a, id_b);

    let mut meta_a = meta_of(&first_a);
    let mut meta_b = meta_of(&first_b);
    for i in 1..4 {
        let (_, a) = post_chat(&app, Some(&id_a), &s1.turns[i].text).await;
        let (_, b) = post_chat(&app, Some(&id_b), &s2.turns[i].text).await;
        meta_a = meta_of(&a);
        meta_b = meta_of(&b);
    }
    // S1 after 4 turns: PERSON+LOCATION+DOB = 3.2; S2 after 4:
    // PERSON+LOCATION+SALARY+AGE+EMAIL = 6.6. Cross-contamination would
    // change either number.
    assert!((meta_a.cpe - 3.2).abs() < 1e-9, "got {}", meta_a.cpe);
    assert!((meta_b.cpe - 6.6).abs() < 1e-9, "got {}", meta_b.cpe);
    assert_eq!(meta_a.trigger_turn, Some(4));
    assert_eq!(meta_b.trigger_turn, Some(2));

    let (_, risk_a) = get_json(&app, &format!("/v1/session/{id_a}/risk")).await;
    let (_, risk_b) = get_json(&app, &format!("/v1/session/{id_b}/risk")).await;
    assert_ne!(risk_a["graph"]["nodes"], risk_b["graph"]["nodes"]);
}

#[tokio::test]
async fn fresh_session_and_blocked_types_in_meta() {
    let app = app(ServiceConfig::default(), Arc::new(MockUpstream::scripted(vec![])));
    let (status, body) = post_chat(&app, None, "my SSN is 123-45-6789").await;
    assert_eq!(status, StatusCode::OK);
    let meta = meta_of(&body);
    assert_eq!(meta.blocked_types, vec![camp_core::EntityType::Ssn]);
    assert!(!body.to_string().contains("123-45-6789"));
}

#[tokio::test]
async fn empty_and_oversized_messages_rejected() {
    let config = ServiceConfig { max_message_len: 64, ..ServiceConfig::default() };
    let app = app(config, Arc::new(MockUpstream::scripted(vec![])));
    let (status, _) = post_chat(&app, None, "").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let big = "x".repeat(65);
    let (status, _) = post_chat(&app, None, &big).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unknown_session_risk_is_404() {
    let app = app(ServiceConfig::default(), Arc::new(MockUpstream::scripted(vec![])));
    let (status, _) = get_json(&app, "/v1/session/nope/risk").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn idle_session_expires_and_risk_turns_404() {
    let config = ServiceConfig { ttl: Duration::from_millis(50), ..ServiceConfig::default() };
    let app = app(config, Arc::new(MockUpstream::scripted(vec![])));
    let (_, body) = post_chat(&app, None, "hello there").await;
    let id = body["session_id"].as_str().unwrap().to_string();
    let (status, risk) = get_json(&app, &format!("/v1/session/{id}/risk")).await;
    assert_eq!(status, StatusCode::OK);
    // Nothing disclosed yet: empty graph, zero score.
    assert_eq!(risk["graph"]["cpe"], json!(0.0));
    assert_eq!(risk["graph"]["nodes"].as_array().unwrap().len(), 0);
    tokio::time::sleep(Duration::from_millis(90)).await;
    let (status, _) = get_json(&app, &format!("/v1/session/{id}/risk")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn upstream_failure_maps_to_502_and_session_survives() {
    struct AlwaysDown;
    impl UpstreamClient for AlwaysDown {
        fn complete(
            &self,
            _context: &[camp_core::ContextMessage],
        ) -> Result<String, camp_core::UpstreamError> {
            Err(camp_core::UpstreamError::Request("down".to_string()))
        }
    }
    let app = app(ServiceConfig::default(), Arc::new(AlwaysDown));
    let (status, body) = post_chat(&app, None, "hello").await;
    assert_eq!(status, StatusCode::BAD_GATEWAY);
    assert!(body["error"].as_str().unwrap().contains("retry"));
}

#[tokio::test]
async fn meta_suppressed_when_configured() {
    let config = ServiceConfig { expose_meta: false, ..ServiceConfig::default() };
    let app = app(config, Arc::new(MockUpstream::scripted(vec![])));
    let (_, body) = post_chat(&app, None, "hello").await;
    assert!(body.get("meta").is_none());
}
