//! An oracle wrapper that records every query, for replay through a section file.

use std::sync::Mutex;

use ctxent_core::context::Context;
use ctxent_core::oracle::{EntropyOracle, EntropySectionSample};
use ctxent_core::Result;

pub struct RecordingOracle<O> {
    inner: O,
    log: Mutex<Vec<(Context, f64)>>,
}

impl<O: EntropyOracle> RecordingOracle<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, log: Mutex::new(Vec::new()) }
    }

    pub fn len(&self) -> usize {
        self.log.lock().expect("recording lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The recorded (context, value) pairs in query order.
    pub fn into_sample(self) -> EntropySectionSample {
        let dim = self.inner.dim();
        let entries = self.log.into_inner().expect("recording lock");
        EntropySectionSample { dim, entries }
    }
}

impl<O: EntropyOracle> EntropyOracle for RecordingOracle<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn query(&self, ctx: &Context) -> Result<f64> {
        let value = self.inner.query(ctx)?;
        self.log.lock().expect("recording lock").push((ctx.clone(), value));
        Ok(value)
    }
}
