from tradenet.cli import main

raise SystemExit(main())
