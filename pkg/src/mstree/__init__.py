"""Random m-ary search trees, their gap urn and a compact tree format."""
