from chanlink.cli import main

raise SystemExit(main())
