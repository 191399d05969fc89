//! Start the HTTP service on an ephemeral port, call it once and shut it
//! down.

use std::io::{Read, Write};
use std::sync::Arc;

use newsthemes::clock::SystemClock;
use newsthemes::config::Config;
use newsthemes::engine::Engine;
use newsthemes::service::{serve, AppState};

fn get(addr: std::net::SocketAddr, path: &str) -> String {
    let mut stream = std::net::TcpStream::connect(addr).unwrap();
    write!(stream, "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    response
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let engine = Arc::new(Engine::new(Config::default()).expect("default config"));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let state = AppState { engine, clock: Arc::new(SystemClock) };
    let server = tokio::spawn(serve(state, listener, async {
        let _ = stopped.await;
    }));

    let response = tokio::task::spawn_blocking(move || get(addr, "/health")).await.unwrap();
    println!("{}", response.lines().next().unwrap_or_default());
    println!("{}", response.split("\r\n\r\n").nth(1).unwrap_or_default());

    let _ = stop.send(());
    server.await.unwrap()
}
