//! A whole session in the browser. Every method returns JSON text so the
//! page needs no generated type bindings.

use inexa_core::abstraction::AbstractionRef;
use inexa_core::fixtures;
use inexa_core::ocel::{parse_log, LogFormat, ObjectId};
use inexa_core::ocpn::{to_dot, ModelGraphPayload};
use inexa_core::session::{Session, SessionConfig};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[wasm_bindgen]
pub struct Explorer {
    session: Session,
}

/// The bank account opening log.
#[wasm_bindgen]
pub fn example_log() -> String {
    fixtures::BANK.to_string()
}

#[wasm_bindgen]
impl Explorer {
    /// Discovers and initializes from an OCEL JSON document.
    #[wasm_bindgen(constructor)]
    pub fn new(log: &str, threshold: usize) -> Result<Explorer, JsValue> {
        let log = parse_log(log.as_bytes(), LogFormat::OcelJson).map_err(js_err)?;
        let session = Session::initialize(log, SessionConfig::with_threshold(threshold)).map_err(js_err)?;
        Ok(Explorer { session })
    }

    /// Model graph, abstraction lists and warnings.
    pub fn state(&self) -> String {
        let s = &self.session;
        json!({
            "model": ModelGraphPayload::from_net(s.net()),
            "available": s.available(),
            "redoable": s.redoable(),
            "history": s.history(),
            "warnings": s.warnings(),
        })
        .to_string()
    }

    /// Applies an abstraction given as `{"kind", "otype", "transitions"}`.
    pub fn apply(&mut self, reference: &str) -> Result<String, JsValue> {
        let r: AbstractionRef = serde_json::from_str(reference).map_err(js_err)?;
        let oid = self.session.apply(&r).map_err(js_err)?;
        Ok(oid.to_string())
    }

    pub fn redo(&mut self, oid: &str) -> Result<(), JsValue> {
        self.session.redo(&ObjectId::new(oid)).map(drop).map_err(js_err)
    }

    pub fn dot(&self) -> String {
        to_dot(self.session.net())
    }

    /// The augmented log.
    pub fn export(&self) -> String {
        String::from_utf8(self.session.export()).expect("JSON is UTF-8")
    }
}
