pub mod tree_bfs;
