# the guidegen/ project directory shadows the installed package as an empty
# namespace package, so probe for a real submodule
try:
    import guidegen.formats  # noqa: F401
except ImportError:
    # planner suite stands alone when the guidance generator is absent
    collect_ignore = ["guidegen"]
