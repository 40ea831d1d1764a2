//! Wire contract of the remote chat-endpoint client: request shape
//! `{model, messages:[{role, content}]}`, bearer credential from the
//! configured environment variable, and `choices[0].message.content`
//! parsing.

use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::State;
use axum::http::HeaderMap;
use axum::routing::post;
use axum::{Json, Router};
use camp_core::{ContextMessage, Role, UpstreamClient};
use camp_service::HttpUpstreamClient;
use serde_json::{json, Value};

#[derive(Clone, Default)]
struct Captured {
    body: Arc<Mutex<Option<Value>>>,
    auth: Arc<Mutex<Option<String>>>,
}

async fn fake_completions(
    State(captured): State<Captured>,
    headers: HeaderMap,
    Json(body): Json<Value>,
) -> Json<Value> {
    *captured.body.lock().unwrap() = Some(body);
    *captured.auth.lock().unwrap() = headers
        .get("authorization")
        .and_then(|v| v.to_str().ok())
        .map(str::to_string);
    Json(json!({
        "choices": [ { "message": { "role": "assistant", "content": "synthetic reply" } } ]
    }))
}

#[tokio::test]
async fn request_shape_and_response_parsing() {
    let captured = Captured::default();
    let app = Router::new()
        .route("/v1/chat/completions", post(fake_completions))
        .with_state(captured.clone());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        axum::serve(listener, app).await.unwrap();
    });

    std::env::set_var("TEST_UPSTREAM_KEY", "secret-token");
    let endpoint = format!("http://{addr}/v1/chat/completions");
    let response = tokio::task::spawn_blocking(move || {
        let client = HttpUpstreamClient::new(
            endpoint,
            "proxy-model",
            "TEST_UPSTREAM_KEY",
            Duration::from_secs(5),
        )
        .unwrap();
        let context = vec![
            ContextMessage { role: Role::User, content: "hello".to_string() },
            ContextMessage { role: Role::Assistant, content: "hi".to_string() },
            ContextMessage { role: Role::User, content: "next".to_string() },
        ];
        client.complete(&context).unwrap()
    })
    .await
    .unwrap();

    assert_eq!(response, "synthetic reply");
    let body = captured.body.lock().unwrap().clone().unwrap();
    assert_eq!(body["model"], json!("proxy-model"));
    assert_eq!(
        body["messages"],
        json!([
            { "role": "user", "content": "hello" },
            { "role": "assistant", "content": "hi" },
            { "role": "user", "content": "next" }
        ])
    );
    let auth = captured.auth.lock().unwrap().clone().unwrap();
    assert_eq!(auth, "Bearer secret-token");
}

#[tokio::test]
async fn non_success_status_is_an_error() {
    async fn busted() -> (axum::http::StatusCode, &'static str) {
        (axum::http::StatusCode::INTERNAL_SERVER_ERROR, "boom")
    }
    let app = Router::new().route("/v1/chat/completions", post(busted));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        axum::serve(listener, app).await.unwrap();
    });

    let endpoint = format!("http://{addr}/v1/chat/completions");
    let result = tokio::task::spawn_blocking(move || {
        let client = HttpUpstreamClient::new(
            endpoint,
            "m",
            "TEST_UPSTREAM_KEY_UNSET",
            Duration::from_secs(5),
        )
        .unwrap();
        client.complete(&[ContextMessage { role: Role::User, content: "x".to_string() }])
    })
    .await
    .unwrap();
    assert!(result.is_err());
}
