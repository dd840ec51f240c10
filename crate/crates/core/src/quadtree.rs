//! Region quadtree over float bounding boxes, used only to generate
//! candidate pairs; every candidate is confirmed exactly by the caller.

/// `[x0, y0, x1, y1]`, closed.
pub type BBox = [f64; 4];

const LEAF_CAPACITY: usize = 8;
const MAX_DEPTH: usize = 28;

fn intersects(a: &BBox, b: &BBox) -> bool {
    a[0] <= b[2] && b[0] <= a[2] && a[1] <= b[3] && b[1] <= a[3]
}

fn contains(outer: &BBox, inner: &BBox) -> bool {
    outer[0] <= inner[0] && inner[2] <= outer[2] && outer[1] <= inner[1] && inner[3] <= outer[3]
}

struct Node {
    bounds: BBox,
    /// Items that straddle a split line or sit at maximum depth.
    items: Vec<usize>,
    children: Option<Box<[Node; 4]>>,
}

impl Node {
    fn new(bounds: BBox) -> Self {
        Node {
            bounds,
            items: Vec::new(),
            children: None,
        }
    }

    fn child_bounds(&self) -> [BBox; 4] {
        let [x0, y0, x1, y1] = self.bounds;
        let mx = 0.5 * (x0 + x1);
        let my = 0.5 * (y0 + y1);
        [[x0, y0, mx, my], [mx, y0, x1, my], [x0, my, mx, y1], [mx, my, x1, y1]]
    }

    fn insert(&mut self, id: usize, bbox: &BBox, boxes: &[BBox], depth: usize) {
        if let Some(children) = self.children.as_mut() {
            for child in children.iter_mut() {
                if contains(&child.bounds, bbox) {
                    child.insert(id, bbox, boxes, depth + 1);
                    return;
                }
            }
            self.items.push(id);
            return;
        }
        self.items.push(id);
        if self.items.len() > LEAF_CAPACITY && depth < MAX_DEPTH {
            let cb = self.child_bounds();
            self.children = Some(Box::new(cb.map(Node::new)));
            let items = std::mem::take(&mut self.items);
            for it in items {
                let b = boxes[it];
                self.insert(it, &b, boxes, depth);
            }
        }
    }

    fn query(&self, bbox: &BBox, boxes: &[BBox], out: &mut Vec<usize>) {
        if !intersects(&self.bounds, bbox) {
            return;
        }
        out.extend(self.items.iter().copied().filter(|&i| intersects(&boxes[i], bbox)));
        if let Some(children) = &self.children {
            for c in children.iter() {
                c.query(bbox, boxes, out);
            }
        }
    }
}

pub struct QuadTree {
    root: Node,
    boxes: Vec<BBox>,
}

impl QuadTree {
    pub fn build(boxes: Vec<BBox>) -> Self {
        let mut bounds = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for b in &boxes {
            bounds[0] = bounds[0].min(b[0]);
            bounds[1] = bounds[1].min(b[1]);
            bounds[2] = bounds[2].max(b[2]);
            bounds[3] = bounds[3].max(b[3]);
        }
        if boxes.is_empty() {
            bounds = [0.0, 0.0, 1.0, 1.0];
        }
        // square root cell
        let side = (bounds[2] - bounds[0]).max(bounds[3] - bounds[1]);
        let root_bounds = [bounds[0], bounds[1], bounds[0] + side, bounds[1] + side];
        let mut root = Node::new(root_bounds);
        for (i, b) in boxes.iter().enumerate() {
            root.insert(i, b, &boxes, 0);
        }
        QuadTree { root, boxes }
    }

    /// Ids of all boxes meeting `bbox` (closed), in ascending order.
    pub fn query(&self, bbox: &BBox) -> Vec<usize> {
        let mut out = Vec::new();
        self.root.query(bbox, &self.boxes, &mut out);
        out.sort_unstable();
        out
    }

    pub fn bbox(&self, id: usize) -> &BBox {
        &self.boxes[id]
    }
}
