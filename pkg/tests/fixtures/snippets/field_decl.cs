private GLControl glControl;
