/**
 * Parse-tree rendering: ParseTree JSON in, DOM subtree out.
 *
 * The drawing is structurally faithful: one element per JSON node, nested
 * exactly like the JSON's parent-child edges, so the rendered node count
 * always equals the JSON node count.  Internal nodes show the ranked-symbol
 * name, leaves show terminals, and wildcard leaves show their nonterminal
 * name in a muted style.
 */

import type { TreeJson, TreeLeafJson, TreeNodeJson } from "./api.js";

function isLeaf(t: TreeJson): t is TreeLeafJson {
  return "leaf" in t;
}

function validate(t: unknown): TreeJson {
  if (typeof t !== "object" || t === null) {
    throw new Error("tree JSON must be an object");
  }
  const node = t as Record<string, unknown>;
  if ("leaf" in node) {
    if (typeof node.leaf !== "string") {
      throw new Error("leaf name must be a string");
    }
    return node as unknown as TreeLeafJson;
  }
  if (typeof node.sym !== "string" || typeof node.rank !== "number") {
    throw new Error("internal node needs a sym and a rank");
  }
  if (!Array.isArray(node.children) || node.children.length !== node.rank) {
    throw new Error(`node ${node.sym} must have exactly ${node.rank} children`);
  }
  node.children.forEach(validate);
  return node as unknown as TreeNodeJson;
}

function build(t: TreeJson): HTMLElement {
  if (isLeaf(t)) {
    const leaf = document.createElement("div");
    leaf.className = t.wildcard ? "tree-leaf tree-wildcard" : "tree-leaf";
    leaf.textContent = t.leaf;
    return leaf;
  }
  const node = document.createElement("div");
  node.className = "tree-node";
  const label = document.createElement("div");
  label.className = "tree-label";
  label.textContent = `(${t.sym},${t.rank})`;
  node.appendChild(label);
  const children = document.createElement("div");
  children.className = "tree-children";
  for (const child of t.children) {
    children.appendChild(build(child));
  }
  node.appendChild(children);
  return node;
}

/**
 * Render ParseTree JSON (an object or a raw string) into a DOM subtree.
 * Malformed input yields an inline error card instead of throwing.
 */
export function renderTree(input: unknown): HTMLElement {
  let tree: TreeJson;
  try {
    const parsed = typeof input === "string" ? JSON.parse(input) : input;
    tree = validate(parsed);
  } catch (err) {
    const card = document.createElement("div");
    card.className = "tree-error";
    card.textContent = `cannot render tree: ${(err as Error).message}`;
    return card;
  }
  const root = document.createElement("div");
  root.className = "tree";
  root.appendChild(build(tree));
  return root;
}

/** Nodes in a ParseTree JSON value (internal nodes plus leaves). */
export function nodeCount(t: TreeJson): number {
  if (isLeaf(t)) {
    return 1;
  }
  return 1 + t.children.reduce((sum, child) => sum + nodeCount(child), 0);
}

/** Nodes in a rendered drawing; pairs with nodeCount for fidelity checks. */
export function renderedNodeCount(root: HTMLElement): number {
  const own = root.matches(".tree-node, .tree-leaf") ? 1 : 0;
  return own + root.querySelectorAll(".tree-node, .tree-leaf").length;
}
