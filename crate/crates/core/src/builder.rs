//! Programmatic construction of projects, mostly for tests and fixtures.

use crate::model::{AnchorRef, Edge, EdgeEnd, Extra, IndexType, OpenEnd, Project, TensorInstance};

#[derive(Debug, Clone, Default)]
pub struct ProjectBuilder {
    project: Project,
}

impl ProjectBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an index type; ids are assigned 1, 2, ... in call order.
    pub fn index_type(mut self, name: &str, default_dim: u64) -> Self {
        let id = self.project.index_types.len() as u8 + 1;
        self.project.index_types.push(IndexType {
            id,
            name: name.to_string(),
            default_dim,
            color: None,
            thickness: None,
            extra: Extra::new(),
        });
        self
    }

    fn push_tensor(&mut self, name: Option<&str>, anchors: u32, network: Option<u8>) -> u32 {
        let id = self.project.tensors.len() as u32 + 1;
        self.project.tensors.push(TensorInstance {
            id,
            name: name.map(str::to_string),
            anchors,
            network,
            geometry: None,
            extra: Extra::new(),
        });
        id
    }

    pub fn tensor(&mut self, name: Option<&str>, anchors: u32, network: u8) -> u32 {
        self.push_tensor(name, anchors, Some(network))
    }

    pub fn unassigned(&mut self, name: Option<&str>, anchors: u32) -> u32 {
        self.push_tensor(name, anchors, None)
    }

    fn push_edge(&mut self, index_type: u8, a: (u32, u32), b: EdgeEnd, dim: Option<u64>) -> u32 {
        let id = self.project.edges.len() as u32 + 1;
        self.project.edges.push(Edge {
            id,
            index_type,
            dim,
            a: AnchorRef {
                tensor: a.0,
                anchor: a.1,
            },
            b,
            geometry: None,
            extra: Extra::new(),
        });
        id
    }

    /// Internal index between two anchors, given as `(tensor id, anchor ordinal)`.
    pub fn link(&mut self, index_type: u8, a: (u32, u32), b: (u32, u32)) -> u32 {
        let end = EdgeEnd::Anchor(AnchorRef {
            tensor: b.0,
            anchor: b.1,
        });
        self.push_edge(index_type, a, end, None)
    }

    pub fn link_with_dim(&mut self, index_type: u8, a: (u32, u32), b: (u32, u32), dim: u64) -> u32 {
        let end = EdgeEnd::Anchor(AnchorRef {
            tensor: b.0,
            anchor: b.1,
        });
        self.push_edge(index_type, a, end, Some(dim))
    }

    /// Open index from an anchor to a numbered plaque.
    pub fn open(&mut self, index_type: u8, a: (u32, u32), plaque: u8) -> u32 {
        let end = EdgeEnd::Open(OpenEnd { plaque, geometry: None });
        self.push_edge(index_type, a, end, None)
    }

    pub fn open_with_dim(&mut self, index_type: u8, a: (u32, u32), plaque: u8, dim: u64) -> u32 {
        let end = EdgeEnd::Open(OpenEnd { plaque, geometry: None });
        self.push_edge(index_type, a, end, Some(dim))
    }

    pub fn build(&self) -> Project {
        self.project.clone()
    }
}
