from gradsample.cli import main

raise SystemExit(main())
