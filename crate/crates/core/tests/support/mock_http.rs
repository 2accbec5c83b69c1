//! Local HTTP server replaying canned responses.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};
use std::thread;

use tiny_http::{Header, Response, Server};

#[derive(Clone)]
pub struct Reply {
    pub status: u16,
    pub body: String,
    pub headers: Vec<(String, String)>,
}

impl Reply {
    pub fn json(body: &str) -> Self {
        Reply {
            status: 200,
            body: body.to_string(),
            headers: vec![("Content-Type".into(), "application/json".into())],
        }
    }

    pub fn status(status: u16) -> Self {
        Reply {
            status,
            body: String::new(),
            headers: Vec::new(),
        }
    }

    pub fn header(mut self, name: &str, value: &str) -> Self {
        self.headers.push((name.into(), value.into()));
        self
    }
}

/// Serves `routes` keyed by path and query. `{base}` in bodies and header
/// values is replaced by the server origin. Unknown routes answer 404.
pub struct MockServer {
    pub base: String,
    hits: Arc<Mutex<Vec<String>>>,
    server: Arc<Server>,
    worker: Option<thread::JoinHandle<()>>,
}

impl MockServer {
    pub fn start(routes: Vec<(&str, Reply)>) -> Self {
        let server = Arc::new(Server::http("127.0.0.1:0").expect("bind mock server"));
        let base = format!("http://{}", server.server_addr().to_ip().expect("ip listener"));
        let routes: BTreeMap<String, Reply> = routes.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        let hits = Arc::new(Mutex::new(Vec::new()));
        let (srv, log, origin) = (Arc::clone(&server), Arc::clone(&hits), base.clone());
        let worker = thread::spawn(move || {
            for request in srv.incoming_requests() {
                let path = request.url().to_string();
                log.lock().unwrap().push(path.clone());
                let reply = routes.get(&path).cloned().unwrap_or_else(|| Reply::status(404));
                let mut response = Response::from_string(reply.body.replace("{base}", &origin))
                    .with_status_code(reply.status);
                for (name, value) in &reply.headers {
                    let value = value.replace("{base}", &origin);
                    response.add_header(Header::from_bytes(name.as_bytes(), value.as_bytes()).unwrap());
                }
                let _ = request.respond(response);
            }
        });
        MockServer {
            base,
            hits,
            server,
            worker: Some(worker),
        }
    }

    pub fn hits(&self) -> Vec<String> {
        self.hits.lock().unwrap().clone()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}
