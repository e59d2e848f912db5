use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use motioncomic_core::analysis::Analyzer;
use motioncomic_core::document::{DocumentError, ProjectDocument};

use crate::error::{ApiError, ApiResult};

/// One committed state of a project.
#[derive(Debug)]
pub struct Revision {
    pub revision: u64,
    pub op: String,
    pub doc: Arc<ProjectDocument>,
}

/// A project's revision chain. Writers serialize on `writer`; readers take
/// the latest committed snapshot without waiting.
#[derive(Debug)]
pub struct Project {
    writer: tokio::sync::Mutex<()>,
    history: RwLock<Vec<Arc<Revision>>>,
}

impl Project {
    fn new(doc: ProjectDocument) -> Self {
        Project {
            writer: tokio::sync::Mutex::new(()),
            history: RwLock::new(vec![Arc::new(Revision {
                revision: 0,
                op: "create".into(),
                doc: Arc::new(doc),
            })]),
        }
    }

    pub fn latest(&self) -> Arc<Revision> {
        self.history.read().expect("history lock").last().cloned().expect("revision 0 exists")
    }

    pub fn at(&self, revision: u64) -> Option<Arc<Revision>> {
        self.history.read().expect("history lock").get(revision as usize).cloned()
    }

    pub fn revisions(&self) -> Vec<(u64, String)> {
        self.history
            .read()
            .expect("history lock")
            .iter()
            .map(|r| (r.revision, r.op.clone()))
            .collect()
    }
}

pub struct AppState {
    pub analyzer: Arc<dyn Analyzer>,
    /// Root of the built-in asset library override, if any.
    pub asset_root: Option<PathBuf>,
    projects: RwLock<HashMap<String, Arc<Project>>>,
    next_id: AtomicU64,
}

pub type SharedState = Arc<AppState>;

impl AppState {
    pub fn new(analyzer: Arc<dyn Analyzer>, asset_root: Option<PathBuf>) -> Self {
        AppState {
            analyzer,
            asset_root,
            projects: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        }
    }

    pub fn insert(&self, doc: ProjectDocument) -> String {
        let id = format!("p{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        self.projects
            .write()
            .expect("project table lock")
            .insert(id.clone(), Arc::new(Project::new(doc)));
        id
    }

    pub fn project(&self, id: &str) -> ApiResult<Arc<Project>> {
        self.projects
            .read()
            .expect("project table lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_project(id))
    }

    /// Applies `f` to a copy of the latest document and commits the result
    /// as the next revision. Nothing is committed when `f` fails.
    /// `blocking` runs `f` off the async runtime.
    pub async fn mutate<T, F>(&self, id: &str, op: &str, blocking: bool, f: F) -> ApiResult<(u64, T)>
    where
        T: Send + 'static,
        F: FnOnce(&mut ProjectDocument) -> Result<T, DocumentError> + Send + 'static,
    {
        let project = self.project(id)?;
        let _guard = project.writer.lock().await;
        let current = project.latest();
        let mut doc = (*current.doc).clone();
        let (doc, out) = if blocking {
            tokio::task::spawn_blocking(move || {
                let out = f(&mut doc);
                (doc, out)
            })
            .await?
        } else {
            let out = f(&mut doc);
            (doc, out)
        };
        let out = out?;
        let revision = current.revision + 1;
        project.history.write().expect("history lock").push(Arc::new(Revision {
            revision,
            op: op.into(),
            doc: Arc::new(doc),
        }));
        Ok((revision, out))
    }
}
